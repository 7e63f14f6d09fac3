#include "tsacap/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tsacap/errors.hpp"

namespace tsacap {

namespace {

constexpr const char* kMagic = "tsacap-checkpoint/1";

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw DataError("checkpoint " + path + " line " + std::to_string(line) + ": " + what);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_checkpoint: cannot open '" + path + "' for writing");
    out << kMagic << "\n";
    out << "kind: " << ckpt.kind << "\n";
    out << "config: " << ckpt.config_json << "\n";
    if (!ckpt.vocab_words.empty()) {
        out << "vocab:";
        for (const auto& w : ckpt.vocab_words) out << ' ' << w;
        out << "\n";
    }
    if (!ckpt.attribute_words.empty()) {
        out << "attributes:";
        for (const auto& w : ckpt.attribute_words) out << ' ' << w;
        out << "\n";
    }
    out << "params: " << ckpt.params.size() << "\n";
    for (const auto& [name, tensor] : ckpt.params) {
        out << "param: " << name;
        for (std::size_t d : tensor.shape()) out << ' ' << d;
        out << "\n";
    }
    out << "data:\n";
    for (const auto& [name, tensor] : ckpt.params) {
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            if (i) out << ' ';
            out << format_double(tensor[i]);
        }
        out << "\n";
    }
    if (!out) throw DataError("save_checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_checkpoint: cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    const auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) fail(path, line_no + 1, "unexpected end of file");
        ++line_no;
        return line;
    };

    if (next_line() != kMagic) fail(path, line_no, std::string("expected '") + kMagic + "'");

    Checkpoint ckpt;
    std::vector<std::pair<std::string, Shape>> manifest;
    std::size_t declared = 0;
    bool have_params = false;
    for (;;) {
        next_line();
        if (line == "data:") break;
        const auto colon = line.find(": ");
        if (colon == std::string::npos && line != "data:") fail(path, line_no, "malformed header line");
        const std::string key = line.substr(0, colon);
        const std::string value = line.substr(colon + 2);
        if (key == "kind") {
            ckpt.kind = value;
        } else if (key == "config") {
            ckpt.config_json = value;
        } else if (key == "vocab") {
            ckpt.vocab_words = split_words(value);
        } else if (key == "attributes") {
            ckpt.attribute_words = split_words(value);
        } else if (key == "params") {
            declared = std::strtoull(value.c_str(), nullptr, 10);
            have_params = true;
        } else if (key == "param") {
            std::istringstream ps(value);
            std::string name;
            if (!(ps >> name)) fail(path, line_no, "param entry without a name");
            Shape shape;
            std::size_t d;
            while (ps >> d) shape.push_back(d);
            if (shape.empty()) fail(path, line_no, "param '" + name + "' without a shape");
            manifest.emplace_back(name, std::move(shape));
        } else {
            fail(path, line_no, "unknown header key '" + key + "'");
        }
    }
    if (ckpt.kind.empty()) fail(path, line_no, "missing 'kind' header");
    if (!have_params || manifest.size() != declared)
        fail(path, line_no,
             "manifest lists " + std::to_string(manifest.size()) + " parameters, declared " +
                 std::to_string(declared));

    for (const auto& [name, shape] : manifest) {
        next_line();
        std::size_t count = 1;
        for (std::size_t d : shape) count *= d;
        std::vector<double> values;
        values.reserve(count);
        const char* p = line.c_str();
        char* end = nullptr;
        for (;;) {
            const double v = std::strtod(p, &end);
            if (end == p) break;
            values.push_back(v);
            p = end;
        }
        if (values.size() != count)
            fail(path, line_no,
                 "parameter '" + name + "' has " + std::to_string(values.size()) + " values, shape " +
                     shape_str(shape) + " needs " + std::to_string(count));
        ckpt.params.emplace(name, Tensor(shape, std::move(values)));
    }
    if (ckpt.params.size() != manifest.size())
        throw DataError("checkpoint " + path + ": duplicate parameter names in manifest");
    return ckpt;
}

}  // namespace tsacap

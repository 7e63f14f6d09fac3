#include "tsacap/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tsacap/errors.hpp"

namespace tsacap {

using json = nlohmann::json;

Tensor encode_video(std::span<const std::vector<double>> frame_features,
                    std::span<const std::vector<double>> clip_features) {
    if (frame_features.empty() || clip_features.empty())
        throw NumericError("encode_video: feature lists must be non-empty");
    const std::size_t df = frame_features[0].size();
    const std::size_t dc = clip_features[0].size();
    Tensor v({df + dc});
    for (const auto& f : frame_features) {
        if (f.size() != df) throw ShapeError("encode_video: inconsistent frame feature lengths");
        for (std::size_t i = 0; i < df; ++i) v[i] += f[i];
    }
    for (const auto& c : clip_features) {
        if (c.size() != dc) throw ShapeError("encode_video: inconsistent clip feature lengths");
        for (std::size_t i = 0; i < dc; ++i) v[df + i] += c[i];
    }
    for (std::size_t i = 0; i < df; ++i) v[i] /= static_cast<double>(frame_features.size());
    for (std::size_t i = 0; i < dc; ++i) v[df + i] /= static_cast<double>(clip_features.size());
    return v;
}

Tensor encode_video(const VideoExample& video) {
    return encode_video(video.frame_features, video.clip_features);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json grid_to_json(const RegionGrid& g) {
    json rows = json::array();
    for (std::size_t r = 0; r < g.grid_size; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < g.grid_size; ++c) {
            auto region = g.region(r * g.grid_size + c);
            row.push_back(std::vector<double>(region.begin(), region.end()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw DataError("corpus line " + std::to_string(line) + ": " + what);
}

const json& field(const json& j, const char* name, std::size_t line) {
    auto it = j.find(name);
    if (it == j.end()) fail(line, std::string("missing field '") + name + "'");
    return *it;
}

RegionGrid grid_from_json(const json& j, const CorpusHeader& h, std::size_t line) {
    RegionGrid g;
    g.grid_size = h.grid_size;
    g.region_dim = h.region_dim;
    if (!j.is_array() || j.size() != h.grid_size) fail(line, "field 'region_grids': bad row count");
    g.features.reserve(g.region_count() * g.region_dim);
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != h.grid_size) fail(line, "field 'region_grids': bad column count");
        for (const auto& cell : row) {
            if (!cell.is_array() || cell.size() != h.region_dim)
                fail(line, "field 'region_grids': region feature length != region_dim");
            for (const auto& v : cell) g.features.push_back(v.get<double>());
        }
    }
    return g;
}

}  // namespace

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_corpus: cannot open '" + path + "' for writing");
    json header = {
        {"type", "header"},
        {"format", "tsacap-corpus/1"},
        {"frames_per_video", corpus.header.frames_per_video},
        {"frame_dim", corpus.header.frame_dim},
        {"clip_dim", corpus.header.clip_dim},
        {"grid_size", corpus.header.grid_size},
        {"region_dim", corpus.header.region_dim},
        {"static_words", corpus.header.static_words},
        {"dynamic_words", corpus.header.dynamic_words},
    };
    out << header.dump() << "\n";
    for (const VideoExample& v : corpus.videos) {
        json rec = {
            {"type", "video"},
            {"id", v.id},
            {"frame_features", v.frame_features},
            {"clip_features", v.clip_features},
            {"captions", v.captions},
        };
        json grids = json::array();
        for (const RegionGrid& g : v.region_grids) grids.push_back(grid_to_json(g));
        rec["region_grids"] = std::move(grids);
        out << rec.dump() << "\n";
    }
    if (!out) throw DataError("save_corpus: write to '" + path + "' failed");
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_corpus: cannot open '" + path + "'");
    Corpus corpus;
    std::string text;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            fail(line_no, std::string("not a valid record: ") + e.what());
        }
        const std::string type = field(j, "type", line_no).get<std::string>();
        if (!have_header) {
            if (type != "header") fail(line_no, "expected header record first");
            CorpusHeader& h = corpus.header;
            h.frames_per_video = field(j, "frames_per_video", line_no).get<std::size_t>();
            h.frame_dim = field(j, "frame_dim", line_no).get<std::size_t>();
            h.clip_dim = field(j, "clip_dim", line_no).get<std::size_t>();
            h.grid_size = field(j, "grid_size", line_no).get<std::size_t>();
            h.region_dim = field(j, "region_dim", line_no).get<std::size_t>();
            h.static_words = field(j, "static_words", line_no).get<std::vector<std::string>>();
            h.dynamic_words = field(j, "dynamic_words", line_no).get<std::vector<std::string>>();
            if (h.frames_per_video == 0) fail(line_no, "field 'frames_per_video': must be positive");
            have_header = true;
            continue;
        }
        if (type != "video") fail(line_no, "unknown record type '" + type + "'");
        const CorpusHeader& h = corpus.header;
        VideoExample v;
        v.id = field(j, "id", line_no).get<std::string>();
        v.frame_features = field(j, "frame_features", line_no).get<std::vector<std::vector<double>>>();
        v.clip_features = field(j, "clip_features", line_no).get<std::vector<std::vector<double>>>();
        v.captions = field(j, "captions", line_no).get<std::vector<std::vector<std::string>>>();
        if (v.frame_features.size() != h.frames_per_video)
            fail(line_no, "field 'frame_features': expected " + std::to_string(h.frames_per_video) +
                              " frames, got " + std::to_string(v.frame_features.size()));
        for (const auto& f : v.frame_features)
            if (f.size() != h.frame_dim) fail(line_no, "field 'frame_features': length != frame_dim");
        if (v.clip_features.size() != h.frames_per_video)
            fail(line_no, "field 'clip_features': expected " + std::to_string(h.frames_per_video) +
                              " clips, got " + std::to_string(v.clip_features.size()));
        for (const auto& c : v.clip_features)
            if (c.size() != h.clip_dim) fail(line_no, "field 'clip_features': length != clip_dim");
        const json& grids = field(j, "region_grids", line_no);
        if (!grids.is_array() || grids.size() != h.frames_per_video)
            fail(line_no, "field 'region_grids': expected one grid per frame");
        for (const auto& gj : grids) v.region_grids.push_back(grid_from_json(gj, h, line_no));
        if (v.captions.empty()) fail(line_no, "field 'captions': at least one caption required");
        for (const auto& c : v.captions)
            if (c.empty()) fail(line_no, "field 'captions': empty caption");
        corpus.videos.push_back(std::move(v));
    }
    if (!have_header) throw DataError("corpus line 1: missing header record");
    return corpus;
}

void save_predictions(const std::vector<std::pair<std::string, std::vector<std::string>>>& predictions,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("save_predictions: cannot open '" + path + "' for writing");
    for (const auto& [id, tokens] : predictions) {
        out << id << '\t';
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) out << ' ';
            out << tokens[i];
        }
        out << '\n';
    }
}

std::vector<std::pair<std::string, std::vector<std::string>>> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_predictions: cannot open '" + path + "'");
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        const auto tab = text.find('\t');
        if (tab == std::string::npos)
            throw DataError("predictions line " + std::to_string(line_no) + ": missing tab separator");
        std::vector<std::string> tokens;
        std::istringstream rest(text.substr(tab + 1));
        std::string tok;
        while (rest >> tok) tokens.push_back(tok);
        out.emplace_back(text.substr(0, tab), std::move(tokens));
    }
    return out;
}

std::vector<std::string> most_common_words(const Corpus& corpus, std::size_t k) {
    if (corpus.videos.empty()) throw DataError("most_common_words: empty corpus");
    std::map<std::string, std::size_t> counts;
    for (const VideoExample& v : corpus.videos)
        for (const auto& caption : v.captions)
            for (const std::string& t : caption) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    std::vector<std::string> words;
    words.reserve(ranked.size());
    for (auto& [w, c] : ranked) words.push_back(w);
    return words;
}

std::vector<std::uint8_t> attribute_labels(const VideoExample& video,
                                           std::span<const std::string> attribute_words) {
    std::set<std::string> present;
    for (const auto& caption : video.captions) present.insert(caption.begin(), caption.end());
    std::vector<std::uint8_t> labels;
    labels.reserve(attribute_words.size());
    for (const std::string& w : attribute_words) labels.push_back(present.count(w) ? 1 : 0);
    return labels;
}

std::vector<RegionBag> build_image_bags(const Corpus& corpus,
                                        std::span<const std::string> attribute_words) {
    std::vector<RegionBag> bags;
    for (const VideoExample& v : corpus.videos) {
        auto labels = attribute_labels(v, attribute_words);
        for (const RegionGrid& g : v.region_grids) {
            RegionBag bag;
            bag.frames.push_back(g);
            bag.labels = labels;
            bags.push_back(std::move(bag));
        }
    }
    return bags;
}

std::vector<RegionBag> build_video_bags(const Corpus& corpus,
                                        std::span<const std::string> attribute_words) {
    std::vector<RegionBag> bags;
    for (const VideoExample& v : corpus.videos) {
        RegionBag bag;
        bag.frames = v.region_grids;
        bag.labels = attribute_labels(v, attribute_words);
        bags.push_back(std::move(bag));
    }
    return bags;
}

}  // namespace tsacap

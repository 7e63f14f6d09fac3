#include "tsacap/vocab.hpp"

#include <algorithm>

#include "tsacap/errors.hpp"

namespace tsacap {

Vocabulary::Vocabulary(std::vector<std::string> words) {
    tokens_ = {"<bos>", "<eos>", "<unk>"};
    tokens_.insert(tokens_.end(), words.begin(), words.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
            throw DataError("vocabulary: duplicate token '" + tokens_[i] + "'");
    }
}

int Vocabulary::id(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
        throw DataError("vocabulary: token id " + std::to_string(id) + " out of range, size " +
                        std::to_string(tokens_.size()));
    return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) != 0; }

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size() + 1);
    for (const std::string& t : tokens) ids.push_back(id(t));
    ids.push_back(kEos);
    return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
    std::vector<std::string> out;
    for (int id : ids) {
        if (id == kEos) break;
        out.push_back(token(id));
    }
    return out;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> captions, std::size_t k) {
    if (captions.empty()) throw DataError("build_vocabulary: no captions");
    if (k < 1) throw DataError("build_vocabulary: k must be at least 1");
    std::map<std::string, std::size_t> counts;
    for (const auto& caption : captions)
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
    std::sort(words.begin(), words.end());
    return Vocabulary(std::move(words));
}

std::vector<double> one_hot(int id, std::size_t vocab_size) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
        throw DataError("one_hot: id " + std::to_string(id) + " out of range for vocabulary of " +
                        std::to_string(vocab_size));
    std::vector<double> v(vocab_size, 0.0);
    v[static_cast<std::size_t>(id)] = 1.0;
    return v;
}

}  // namespace tsacap

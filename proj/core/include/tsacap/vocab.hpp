#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace tsacap {

// Token vocabulary with reserved sentinels at fixed indices. Built from the
// K most frequent caption tokens; everything else encodes to UNK.
class Vocabulary {
  public:
    static constexpr int kBos = 0;
    static constexpr int kEos = 1;
    static constexpr int kUnk = 2;

    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> words);  // non-reserved tokens, in order

    int id(const std::string& token) const;  // kUnk when absent
    const std::string& token(int id) const;
    std::size_t size() const { return tokens_.size(); }
    bool contains(const std::string& token) const;
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Token ids with a terminal EOS appended (no BOS).
    std::vector<int> encode(std::span<const std::string> tokens) const;
    // Drops the terminal EOS.
    std::vector<std::string> decode(std::span<const int> ids) const;

  private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
};

// K most frequent tokens over all captions, ties broken lexicographically.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> captions, std::size_t k);

std::vector<double> one_hot(int id, std::size_t vocab_size);

}  // namespace tsacap

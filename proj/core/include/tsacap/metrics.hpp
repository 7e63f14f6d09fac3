#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace tsacap {

// One scored item: a candidate caption and its reference set, pre-tokenized
// (whitespace-split lowercase tokens); the metrics do no further
// normalization.
struct EvaluationRecord {
    std::string id;
    std::vector<std::string> candidate;
    std::vector<std::vector<std::string>> references;  // at least one, non-empty
};

// Corpus-level BLEU@N in [0, 100]: clipped modified n-gram precisions pooled
// over the corpus, geometric mean over orders 1..N, brevity penalty
// exp(min(0, 1 - r/c)) with r the sum of closest reference lengths. No
// smoothing: a zero precision at any order gives 0.
double bleu_n(std::span<const EvaluationRecord> records, int n);

// CIDEr-D in [0, 10]: TF-IDF vectors over n-grams of order 1..4 with document
// frequencies from the reference corpus, clipped candidate counts, Gaussian
// length penalty with sigma 6, cosine similarity averaged over orders and
// references, scaled by 10, averaged over records.
double cider_d(std::span<const EvaluationRecord> records);

// All metrics in one report, keyed by display name (BLEU@1..4, CIDEr-D).
std::map<std::string, double> score_all(std::span<const EvaluationRecord> records);

}  // namespace tsacap

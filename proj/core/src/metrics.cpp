#include "tsacap/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tsacap/errors.hpp"

namespace tsacap {

namespace {

constexpr int kMaxOrder = 4;
constexpr double kCiderSigma = 6.0;

using Counts = std::map<std::string, double>;

// N-grams as space-joined keys; tokens are whitespace-free by construction.
Counts ngram_counts(const std::vector<std::string>& tokens, int n) {
    Counts counts;
    if (tokens.size() < static_cast<std::size_t>(n)) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key += ' ';
            key += tokens[i + j];
        }
        counts[key] += 1.0;
    }
    return counts;
}

void check_records(std::span<const EvaluationRecord> records, const char* where) {
    if (records.empty()) throw DataError(std::string(where) + ": empty corpus");
    for (const EvaluationRecord& r : records) {
        if (r.references.empty())
            throw DataError(std::string(where) + ": record '" + r.id + "' has no references");
        for (const auto& ref : r.references)
            if (ref.empty())
                throw DataError(std::string(where) + ": record '" + r.id + "' has an empty reference");
    }
}

}  // namespace

double bleu_n(std::span<const EvaluationRecord> records, int n) {
    if (n < 1 || n > kMaxOrder) throw DataError("bleu_n: order must be in 1..4");
    check_records(records, "bleu_n");

    std::vector<double> matched(static_cast<std::size_t>(n), 0.0);
    std::vector<double> total(static_cast<std::size_t>(n), 0.0);
    long long cand_len = 0;
    long long ref_len = 0;

    for (const EvaluationRecord& r : records) {
        cand_len += static_cast<long long>(r.candidate.size());
        // Closest reference length; ties go to the shorter reference.
        long long best_ref = static_cast<long long>(r.references[0].size());
        for (const auto& ref : r.references) {
            const long long len = static_cast<long long>(ref.size());
            const long long cur = std::llabs(len - static_cast<long long>(r.candidate.size()));
            const long long best = std::llabs(best_ref - static_cast<long long>(r.candidate.size()));
            if (cur < best || (cur == best && len < best_ref)) best_ref = len;
        }
        ref_len += best_ref;

        for (int order = 1; order <= n; ++order) {
            Counts cand = ngram_counts(r.candidate, order);
            Counts clip;
            for (const auto& ref : r.references)
                for (const auto& [key, count] : ngram_counts(ref, order)) {
                    auto [it, inserted] = clip.emplace(key, count);
                    if (!inserted) it->second = std::max(it->second, count);
                }
            for (const auto& [key, count] : cand) {
                total[order - 1] += count;
                auto it = clip.find(key);
                if (it != clip.end()) matched[order - 1] += std::min(count, it->second);
            }
        }
    }

    double log_precision = 0.0;
    for (int order = 1; order <= n; ++order) {
        if (total[order - 1] == 0.0 || matched[order - 1] == 0.0) return 0.0;
        log_precision += std::log(matched[order - 1] / total[order - 1]);
    }
    if (cand_len == 0) return 0.0;
    const double bp =
        cand_len > ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return 100.0 * bp * std::exp(log_precision / static_cast<double>(n));
}

namespace {

struct TfIdfVec {
    Counts weights[kMaxOrder];
    double norm[kMaxOrder] = {0, 0, 0, 0};
    std::size_t length = 0;  // unigram count
};

TfIdfVec tfidf(const std::vector<std::string>& tokens, const Counts& doc_freq, double log_docs) {
    TfIdfVec vec;
    vec.length = tokens.size();
    for (int order = 1; order <= kMaxOrder; ++order) {
        Counts& w = vec.weights[order - 1];
        for (const auto& [key, count] : ngram_counts(tokens, order)) {
            auto df = doc_freq.find(key);
            const double idf = log_docs - std::log(df == doc_freq.end() ? 1.0 : std::max(1.0, df->second));
            w[key] = count * idf;
            vec.norm[order - 1] += w[key] * w[key];
        }
        vec.norm[order - 1] = std::sqrt(vec.norm[order - 1]);
    }
    return vec;
}

// Clipped cosine per order, with the Gaussian length penalty applied to each.
double similarity(const TfIdfVec& cand, const TfIdfVec& ref) {
    const double delta = static_cast<double>(cand.length) - static_cast<double>(ref.length);
    const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
    double total = 0.0;
    for (int order = 0; order < kMaxOrder; ++order) {
        double dot = 0.0;
        for (const auto& [key, wc] : cand.weights[order]) {
            auto it = ref.weights[order].find(key);
            if (it != ref.weights[order].end()) dot += std::min(wc, it->second) * it->second;
        }
        double val = 0.0;
        if (cand.norm[order] != 0.0 && ref.norm[order] != 0.0)
            val = dot / (cand.norm[order] * ref.norm[order]);
        total += val * penalty;
    }
    return total / static_cast<double>(kMaxOrder);
}

}  // namespace

double cider_d(std::span<const EvaluationRecord> records) {
    check_records(records, "cider_d");
    if (records.size() < 2) throw DataError("cider_d: at least two records required for document frequencies");

    // Document frequency: number of records whose reference set contains the
    // n-gram.
    Counts doc_freq;
    for (const EvaluationRecord& r : records) {
        Counts seen;
        for (const auto& ref : r.references)
            for (int order = 1; order <= kMaxOrder; ++order)
                for (const auto& [key, count] : ngram_counts(ref, order)) seen[key] = 1.0;
        for (const auto& [key, one] : seen) doc_freq[key] += 1.0;
    }
    const double log_docs = std::log(static_cast<double>(records.size()));

    double total = 0.0;
    for (const EvaluationRecord& r : records) {
        TfIdfVec cand = tfidf(r.candidate, doc_freq, log_docs);
        double rec_score = 0.0;
        for (const auto& ref : r.references) rec_score += similarity(cand, tfidf(ref, doc_freq, log_docs));
        total += 10.0 * rec_score / static_cast<double>(r.references.size());
    }
    return total / static_cast<double>(records.size());
}

std::map<std::string, double> score_all(std::span<const EvaluationRecord> records) {
    std::map<std::string, double> report;
    for (int n = 1; n <= kMaxOrder; ++n) report["BLEU@" + std::to_string(n)] = bleu_n(records, n);
    report["CIDEr-D"] = cider_d(records);
    return report;
}

}  // namespace tsacap

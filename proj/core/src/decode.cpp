#include "tsacap/decode.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tsacap/errors.hpp"

namespace tsacap {

namespace {

struct Candidate {
    double score;
    int token;
    std::size_t parent;
};

bool ranks_before(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.token != b.token) return a.token < b.token;
    return a.parent < b.parent;
}

struct Pool {
    DecodeResult best{{}, -std::numeric_limits<double>::infinity()};
    bool any = false;

    void offer(Caption tokens, double score) {
        // Strictly-greater keeps the earliest hypothesis on ties.
        if (!any || score > best.score) {
            tokens.push_back(Vocabulary::kEos);
            best = {std::move(tokens), score};
            any = true;
        }
    }
};

}  // namespace

DecodeResult beam_search(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                         const Tensor& attr_video, std::size_t beam_size, std::size_t max_len) {
    if (beam_size < 1) throw DataError("beam_search: beam size must be >= 1");
    if (max_len < 1) throw DataError("beam_search: max_len must be >= 1");
    const std::size_t vocab = model.dims().vocab;

    Hypothesis root;
    root.state = model.video_step(video, attr_image, attr_video);
    {
        StepOutput out = model.word_step(root.state, Vocabulary::kBos, attr_image, attr_video);
        root.state = out.state;
        root.next_log_probs = out.log_probs;
    }
    std::vector<Hypothesis> beam{std::move(root)};
    Pool pool;

    for (std::size_t len = 1; len + 1 <= max_len && !beam.empty(); ++len) {
        std::vector<Candidate> candidates;
        candidates.reserve(beam.size() * vocab);
        for (std::size_t h = 0; h < beam.size(); ++h)
            for (std::size_t t = 0; t < vocab; ++t)
                candidates.push_back({beam[h].score + beam[h].next_log_probs[t], static_cast<int>(t), h});
        std::sort(candidates.begin(), candidates.end(), ranks_before);

        std::vector<Hypothesis> next;
        for (const Candidate& c : candidates) {
            if (c.token == Vocabulary::kEos) {
                // Only an EOS that outranks the would-be beam is final.
                if (next.size() < beam_size) pool.offer(beam[c.parent].tokens, c.score);
                continue;
            }
            if (next.size() == beam_size) continue;
            Hypothesis h;
            h.tokens = beam[c.parent].tokens;
            h.tokens.push_back(c.token);
            h.score = c.score;
            StepOutput out = model.word_step(beam[c.parent].state, c.token, attr_image, attr_video);
            h.state = out.state;
            h.next_log_probs = out.log_probs;
            next.push_back(std::move(h));
        }
        beam = std::move(next);
    }

    // Length-capped hypotheses close with EOS and compete on total score.
    for (Hypothesis& h : beam) pool.offer(h.tokens, h.score + h.next_log_probs[Vocabulary::kEos]);
    return pool.best;
}

DecodeResult greedy_decode(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                           const Tensor& attr_video, std::size_t max_len) {
    if (max_len < 1) throw DataError("greedy_decode: max_len must be >= 1");
    StepState state = model.video_step(video, attr_image, attr_video);
    StepOutput out = model.word_step(state, Vocabulary::kBos, attr_image, attr_video);

    DecodeResult result{{}, 0.0};
    for (std::size_t len = 1; len + 1 <= max_len; ++len) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < out.log_probs.size(); ++t)
            if (out.log_probs[t] > out.log_probs[best]) best = t;
        result.score += out.log_probs[best];
        if (static_cast<int>(best) == Vocabulary::kEos) {
            result.caption.push_back(Vocabulary::kEos);
            return result;
        }
        result.caption.push_back(static_cast<int>(best));
        out = model.word_step(out.state, static_cast<int>(best), attr_image, attr_video);
    }
    result.score += out.log_probs[Vocabulary::kEos];
    result.caption.push_back(Vocabulary::kEos);
    return result;
}

DecodeResult exhaustive_decode(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                               const Tensor& attr_video, std::size_t max_len, std::size_t budget) {
    if (max_len < 1) throw DataError("exhaustive_decode: max_len must be >= 1");
    const std::size_t vocab = model.dims().vocab;
    const std::size_t alphabet = vocab - 1;  // every token except EOS may appear as content
    const std::size_t max_content = max_len - 1;

    double sentences = 1.0;
    double layer = 1.0;
    for (std::size_t l = 1; l <= max_content; ++l) {
        layer *= static_cast<double>(alphabet);
        sentences += layer;
        if (sentences > static_cast<double>(budget))
            throw DataError("exhaustive_decode: candidate sentence count exceeds budget of " +
                            std::to_string(budget));
    }

    StepState state = model.video_step(video, attr_image, attr_video);
    StepOutput root = model.word_step(state, Vocabulary::kBos, attr_image, attr_video);

    Pool pool;
    Caption prefix;
    // Depth-first over content tokens in ascending id order; each prefix is
    // also a candidate sentence once closed with EOS.
    const std::function<void(const StepOutput&, double)> walk = [&](const StepOutput& at, double score) {
        pool.offer(prefix, score + at.log_probs[Vocabulary::kEos]);
        if (prefix.size() == max_content) return;
        for (std::size_t t = 0; t < vocab; ++t) {
            if (static_cast<int>(t) == Vocabulary::kEos) continue;
            prefix.push_back(static_cast<int>(t));
            StepOutput next = model.word_step(at.state, static_cast<int>(t), attr_image, attr_video);
            walk(next, score + at.log_probs[t]);
            prefix.pop_back();
        }
    };
    walk(root, 0.0);
    return pool.best;
}

}  // namespace tsacap

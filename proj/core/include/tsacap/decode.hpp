#pragma once

#include <cstdint>
#include <vector>

#include "tsacap/model.hpp"
#include "tsacap/tensor.hpp"

namespace tsacap {

// A partial sentence during search. Finished hypotheses are never extended.
struct Hypothesis {
    Caption tokens;        // content tokens generated so far (no EOS)
    double score = 0.0;    // accumulated log probability
    StepState state;       // recurrent state after consuming the last token
    Tensor next_log_probs; // distribution for the next extension
    bool finished = false;
};

struct DecodeResult {
    Caption caption;  // content tokens plus terminal EOS
    double score;     // log probability of the full caption including EOS
};

// max_len bounds the total caption length including the terminal EOS, so at
// most max_len-1 content tokens are generated; a hypothesis that reaches the
// cap is closed with EOS and competes on its total score.
//
// All decoders share one tie-break rule: on equal score prefer the lower
// token id, then the earlier hypothesis. Decoding is deterministic.

// Keeps the beam_size best unfinished hypotheses per step. An EOS extension
// that outranks the last surviving hypothesis moves to the completed pool;
// the best-scoring completed hypothesis wins. beam_size 1 reproduces
// greedy_decode exactly, and a beam wide enough to hold every prefix
// reproduces exhaustive_decode.
DecodeResult beam_search(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                         const Tensor& attr_video, std::size_t beam_size, std::size_t max_len);

DecodeResult greedy_decode(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                           const Tensor& attr_video, std::size_t max_len);

// Scores every sentence up to the length cap and returns the global argmax.
// Feasible only for tiny vocabularies; the verification oracle for
// beam_search. Errors out when the candidate count exceeds the budget.
DecodeResult exhaustive_decode(const CaptionModel& model, const Tensor& video, const Tensor& attr_image,
                               const Tensor& attr_video, std::size_t max_len,
                               std::size_t budget = 100000);

}  // namespace tsacap

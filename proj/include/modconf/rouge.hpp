#pragma once

// Tokenization and ROUGE-L F-measure over whitespace tokens.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modconf {

using Tokens = std::vector<std::string>;

// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation from
// each token, drop empties.
Tokens tokenize(std::string_view text);

// O(|a|·|b|) time, O(min) memory.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

// P = LCS/|candidate|, R = LCS/|reference|, F = (1+β²)RP / (R + β²P).
// Any empty side gives all zeros. Throws Error(kInvalidArgument) unless beta > 0.
RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
                   double beta = 1.0);
RougeScore rouge_l_f(std::string_view candidate, std::string_view reference, double beta = 1.0);

}  // namespace modconf

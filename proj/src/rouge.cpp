#include "modconf/rouge.hpp"

#include <algorithm>

#include "modconf/error.hpp"
#include "modconf/text.hpp"

namespace modconf {

Tokens tokenize(std::string_view input) {
  Tokens tokens;
  for (auto word : text::split_whitespace(input)) {
    while (!word.empty() && text::is_ascii_punct(word.front())) word.remove_prefix(1);
    while (!word.empty() && text::is_ascii_punct(word.back())) word.remove_suffix(1);
    if (!word.empty()) tokens.push_back(text::to_lower(word));
  }
  return tokens;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (const auto& x : a) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = x == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = up;
    }
  }
  return row[b.size()];
}

RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
                   double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  RougeScore score;
  if (candidate.empty() || reference.empty()) return score;
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  score.precision = lcs / static_cast<double>(candidate.size());
  score.recall = lcs / static_cast<double>(reference.size());
  const double beta2 = beta * beta;
  const double denominator = score.recall + beta2 * score.precision;
  score.f = denominator > 0.0 ? (1.0 + beta2) * score.recall * score.precision / denominator : 0.0;
  return score;
}

RougeScore rouge_l_f(std::string_view candidate, std::string_view reference, double beta) {
  auto c = tokenize(candidate);
  auto r = tokenize(reference);
  return rouge_l(c, r, beta);
}

}  // namespace modconf

#include "modconf/prompts.hpp"

#include <set>

#include "modconf/error.hpp"
#include "modconf/prompt_assets.hpp"

namespace modconf::prompts {

std::string_view text(Template t) {
  switch (t) {
    case Template::kExtractComponents: return assets::extract_components;
    case Template::kFilterCandidates: return assets::filter_candidates;
    case Template::kSubstituteObject: return assets::substitute_object;
    case Template::kSubstituteAttribute: return assets::substitute_attribute;
    case Template::kSubstituteRelationship: return assets::substitute_relationship;
    case Template::kGenerateAnswer: return assets::generate_answer;
    case Template::kPromptEngineering: return assets::prompt_engineering;
    case Template::kConsistency: return assets::consistency;
    case Template::kJudgeHallucination: return assets::judge_hallucination;
    case Template::kJudgeQuality: return assets::judge_quality;
  }
  return {};
}

std::string_view asset_name(Template t) {
  switch (t) {
    case Template::kExtractComponents: return "extract_components";
    case Template::kFilterCandidates: return "filter_candidates";
    case Template::kSubstituteObject: return "substitute_object";
    case Template::kSubstituteAttribute: return "substitute_attribute";
    case Template::kSubstituteRelationship: return "substitute_relationship";
    case Template::kGenerateAnswer: return "generate_answer";
    case Template::kPromptEngineering: return "prompt_engineering";
    case Template::kConsistency: return "consistency";
    case Template::kJudgeHallucination: return "judge_hallucination";
    case Template::kJudgeQuality: return "judge_quality";
  }
  return {};
}

namespace {

bool placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == ' ';
}

}  // namespace

std::string fill(std::string_view tmpl, const Values& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::set<std::string, std::less<>> used;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t j = i + 1;
      while (j < tmpl.size() && placeholder_char(tmpl[j])) ++j;
      if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
        auto name = tmpl.substr(i + 1, j - i - 1);
        auto it = values.find(name);
        if (it == values.end()) {
          throw Error(ErrorCode::kInvalidArgument, "no value for placeholder {" + std::string(name) + "}");
        }
        out += it->second;
        used.insert(it->first);
        i = j + 1;
        continue;
      }
    }
    out += tmpl[i++];
  }
  for (const auto& [name, value] : values) {
    if (!used.contains(name)) {
      throw Error(ErrorCode::kInvalidArgument, "template has no placeholder {" + name + "}");
    }
  }
  return out;
}

std::string fill(Template t, const Values& values) { return fill(text(t), values); }

}  // namespace modconf::prompts

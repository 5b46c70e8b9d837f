#pragma once

// Prompt templates used for dataset construction, prompt engineering, reward
// judging and evaluation. Texts live in assets/prompts/*.txt and are embedded
// at build time; placeholders are written as {name}.

#include <map>
#include <string>
#include <string_view>

namespace modconf::prompts {

enum class Template {
  kExtractComponents,
  kFilterCandidates,
  kSubstituteObject,
  kSubstituteAttribute,
  kSubstituteRelationship,
  kGenerateAnswer,
  kPromptEngineering,
  kConsistency,
  kJudgeHallucination,
  kJudgeQuality,
};

std::string_view text(Template t);
// File stem under assets/prompts/.
std::string_view asset_name(Template t);

using Values = std::map<std::string, std::string, std::less<>>;

// Replaces each {placeholder} with its value in a single pass (values are not
// re-scanned). Throws Error(kInvalidArgument) if a placeholder has no value or
// a value matches no placeholder.
std::string fill(std::string_view tmpl, const Values& values);

std::string fill(Template t, const Values& values);

}  // namespace modconf::prompts

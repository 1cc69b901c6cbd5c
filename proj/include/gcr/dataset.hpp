#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gcr {

struct Choice {
  std::string label;
  std::string text;
};

// One question with pre-linked topic entities. `choices` is set only for
// multiple-choice datasets, in which case `answers` holds the gold label.
struct QARecord {
  std::string id;
  std::string question;
  std::vector<std::string> question_entities;
  std::vector<std::string> answers;
  std::vector<Choice> choices;
};

// JSON lines with fields id, question, question_entities, answers and an
// optional choices array of {label, text}. Throws ParseError with the line number.
std::vector<QARecord> load_qa(std::istream& in);
std::vector<QARecord> load_qa_file(const std::filesystem::path& path);

}  // namespace gcr

#include "gcr/dataset.hpp"

#include <fstream>
#include <istream>

#include <nlohmann/json.hpp>

#include "gcr/errors.hpp"

namespace gcr {

std::vector<QARecord> load_qa(std::istream& in) {
  std::vector<QARecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QARecord r;
      r.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
      r.question = j.at("question").get<std::string>();
      r.question_entities = j.at("question_entities").get<std::vector<std::string>>();
      r.answers = j.at("answers").get<std::vector<std::string>>();
      if (j.contains("choices")) {
        for (const auto& c : j["choices"]) {
          r.choices.push_back(Choice{c.at("label").get<std::string>(), c.at("text").get<std::string>()});
        }
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad QA record: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<QARecord> load_qa_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open QA file: " + path.string());
  return load_qa(in);
}

}  // namespace gcr

#include "gcr/codec.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gcr/errors.hpp"
#include "gcr/kg.hpp"

namespace gcr {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

Vocab::Vocab() {
  for (std::string_view s : {kPathOpen, kPathClose, kEosText, kUnkText}) {
    index_.emplace(std::string(s), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(s);
  }
  refresh_fingerprint();
}

Vocab Vocab::from_table(const std::unordered_map<std::string, TokenId>& table, TokenizerKind kind) {
  std::vector<std::optional<std::string>> slots(table.size());
  for (const auto& [tok, id] : table) {
    if (id >= table.size()) throw ConfigError("vocabulary ids must be dense from 0; got id " + std::to_string(id));
    if (slots[id]) throw ConfigError("vocabulary id " + std::to_string(id) + " assigned twice");
    if (tok.empty()) throw ConfigError("vocabulary contains an empty token");
    slots[id] = tok;
  }
  const std::string_view expected[] = {kPathOpen, kPathClose, kEosText, kUnkText};
  for (TokenId id = 0; id < special::kCount; ++id) {
    if (id >= slots.size() || *slots[id] != expected[id]) {
      throw ConfigError("vocabulary must map '" + std::string(expected[id]) + "' to id " + std::to_string(id));
    }
  }
  Vocab v;
  v.kind_ = kind;
  v.tokens_.clear();
  v.index_.clear();
  for (auto& s : slots) {
    v.index_.emplace(*s, static_cast<TokenId>(v.tokens_.size()));
    v.max_words_per_token_ = std::max(v.max_words_per_token_, split_whitespace(*s).size());
    v.tokens_.push_back(std::move(*s));
  }
  v.refresh_fingerprint();
  return v;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) throw Error("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

TokenId Vocab::add(std::string_view token) {
  if (auto id = find(token)) return *id;
  const auto id = static_cast<TokenId>(tokens_.size());
  index_.emplace(std::string(token), id);
  tokens_.emplace_back(token);
  refresh_fingerprint();
  return id;
}

void Vocab::refresh_fingerprint() {
  std::uint64_t h = kFnvOffset;
  h = fnv1a(h, kind_ == TokenizerKind::kExternal ? "external" : "reference");
  for (const auto& t : tokens_) {
    h = fnv1a(h, t);
    h = fnv1a(h, std::string_view("\0", 1));
  }
  fingerprint_ = h;
}

TokenSequence Vocab::encode(std::string_view text) const {
  const auto words = split_whitespace(text);
  TokenSequence out;
  out.reserve(words.size());
  if (kind_ == TokenizerKind::kReferenceWhitespace || max_words_per_token_ == 1) {
    for (auto w : words) out.push_back(find(w).value_or(special::kUnk));
    return out;
  }
  std::size_t i = 0;
  std::string candidate;
  while (i < words.size()) {
    std::size_t matched = 0;
    TokenId id = special::kUnk;
    const std::size_t longest = std::min(max_words_per_token_, words.size() - i);
    for (std::size_t n = longest; n >= 1; --n) {
      candidate.assign(words[i]);
      for (std::size_t k = 1; k < n; ++k) {
        candidate += ' ';
        candidate += words[i + k];
      }
      if (auto hit = find(candidate)) {
        id = *hit;
        matched = n;
        break;
      }
    }
    out.push_back(id);
    i += matched == 0 ? 1 : matched;
  }
  return out;
}

std::string Vocab::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += token(tokens[i]);
  }
  return out;
}

Vocab build_vocab(std::span<const std::string> corpus) {
  Vocab v;
  for (const auto& text : corpus) {
    for (auto w : split_whitespace(text)) v.add(w);
  }
  return v;
}

Vocab load_vocab_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocabulary file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("vocabulary file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("vocabulary file must be a JSON object of token -> id");
  std::unordered_map<std::string, TokenId> table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_unsigned()) throw ConfigError("vocabulary id for '" + it.key() + "' is not an integer");
    table.emplace(it.key(), it.value().get<TokenId>());
  }
  return Vocab::from_table(table, TokenizerKind::kExternal);
}

void save_vocab_file(const Vocab& vocab, const std::filesystem::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (TokenId id = 0; id < vocab.size(); ++id) j[vocab.token(id)] = id;
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary file: " + path.string());
  out << j.dump(1) << '\n';
}

std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

std::vector<PretokenizedPath> load_pretokenized_paths(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open path file: " + path.string());
  std::vector<PretokenizedPath> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_whitespace(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out.push_back(PretokenizedPath{j.at("tokens").get<TokenSequence>(), j.value("path", std::string())});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad path record: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace gcr

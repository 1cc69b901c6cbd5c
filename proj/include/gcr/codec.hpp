#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gcr {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

namespace special {
inline constexpr TokenId kPathOpen = 0;
inline constexpr TokenId kPathClose = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kCount = 4;
}  // namespace special

inline constexpr std::string_view kEosText = "</s>";
// Output headers the decoder forces around the constrained path segment.
inline constexpr std::string_view kPathHeader = "# Reasoning Path:";
inline constexpr std::string_view kAnswerHeader = "# Answer:";
inline constexpr std::string_view kUnkText = "<unk>";

enum class TokenizerKind { kReferenceWhitespace, kExternal };

// Bijective token table. Ids 0..3 are always <PATH>, </PATH>, </s>, <unk>.
//
// Reference vocabularies split on whitespace and map each word to one id.
// External vocabularies are loaded from a JSON token->id table and segment
// text by greedy longest match over runs of whole words, so a table entry such
// as "Justin Bieber" is emitted as a single id.
class Vocab {
 public:
  Vocab();

  static Vocab from_table(const std::unordered_map<std::string, TokenId>& table, TokenizerKind kind);

  TokenizerKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const;

  // Adds a word if absent; returns its id. Only used while building.
  TokenId add(std::string_view token);

  // 64-bit FNV-1a over the kind tag and the token table in id order.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  TokenSequence encode(std::string_view text) const;
  // Joins token surfaces with single spaces. Throws Error on out-of-range ids.
  std::string decode(std::span<const TokenId> tokens) const;

 private:
  void refresh_fingerprint();

  TokenizerKind kind_ = TokenizerKind::kReferenceWhitespace;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t max_words_per_token_ = 1;
  std::uint64_t fingerprint_ = 0;
};

Vocab build_vocab(std::span<const std::string> corpus);

Vocab load_vocab_file(const std::filesystem::path& path);
void save_vocab_file(const Vocab& vocab, const std::filesystem::path& path);

std::vector<std::string_view> split_whitespace(std::string_view text);

std::string fingerprint_hex(std::uint64_t fp);

// One line of a pre-tokenized path file.
struct PretokenizedPath {
  TokenSequence tokens;
  std::string path;
};

std::vector<PretokenizedPath> load_pretokenized_paths(const std::filesystem::path& path);

}  // namespace gcr

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hoie::enc {

// Word -> id map. Id 0 is padding, id 1 stands in for unseen words.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);  // words[0..1] must be the reserved entries

  int add(std::string_view word);
  int id(std::string_view word) const;
  const std::string& word(int id) const;
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> ids_;
};

}  // namespace hoie::enc

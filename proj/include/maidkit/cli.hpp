#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maidkit/core.hpp"
#include "maidkit/patterns.hpp"
#include "maidkit/semantics.hpp"
#include "maidkit/simplify.hpp"

namespace maidkit::cli {

class ParseError : public MaidError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Reads the text format. Structural problems other than syntax and
/// duplicate ids are left to `validate`.
Maid parse(std::string_view text);

/// Writes the text format; `parse(render(m))` reproduces `m`.
std::string render(const Maid& maid);

/// card-game: n >= 1 announcers. Throws MaidError on an unknown name or n < 1.
Maid fixture(std::string_view name, int n = 1);
Maid card_game(int n);
Maid principal_agent();

std::string to_dot(const Maid& maid);

nlohmann::json patterns_json(const PatternReport& report);
nlohmann::json simplify_json(const SimplificationResult& result, bool with_trace);
nlohmann::json leaf_count_json(const BigCount& count);

/// Entry point of the `maid` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace maidkit::cli

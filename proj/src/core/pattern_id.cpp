#include "gradscan/pattern_id.hpp"

#include "gradscan/error.hpp"

namespace gradscan {

std::string_view to_token(PatternId id) noexcept {
  switch (id) {
    case PatternId::GradXPos: return "gx+";
    case PatternId::GradXNeg: return "gx-";
    case PatternId::GradYPos: return "gy+";
    case PatternId::GradYNeg: return "gy-";
    case PatternId::FullOn: return "full";
  }
  return "full";
}

PatternId pattern_from_token(std::string_view token) {
  for (PatternId id : kPatternSequence)
    if (to_token(id) == token) return id;
  throw_invalid("unknown pattern id '" + std::string(token) + "'");
}

}  // namespace gradscan

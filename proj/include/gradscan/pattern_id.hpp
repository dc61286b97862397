#pragma once

#include <array>
#include <string>
#include <string_view>

namespace gradscan {

/// The five screen illuminations. The negative gradients are the pointwise
/// complements of the positive ones.
enum class PatternId { GradXPos, GradXNeg, GradYPos, GradYNeg, FullOn };

/// Canonical display order; FullOn is always last.
inline constexpr std::array<PatternId, 5> kPatternSequence = {
    PatternId::GradXPos, PatternId::GradXNeg, PatternId::GradYPos, PatternId::GradYNeg,
    PatternId::FullOn};

/// Manifest token: "gx+", "gx-", "gy+", "gy-", "full".
std::string_view to_token(PatternId id) noexcept;

/// Inverse of to_token; throws Error(validation) for unknown tokens.
PatternId pattern_from_token(std::string_view token);

}  // namespace gradscan

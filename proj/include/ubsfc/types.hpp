#pragma once

#include <cstdint>

namespace ubsfc {

using HouseholdId = std::uint32_t;
using FirmId = std::int32_t;
inline constexpr FirmId kNoFirm = -1;

}  // namespace ubsfc

#pragma once

#include <string_view>

namespace lzae::detail {

// Training text for the order-2 byte transition table used by the
// markov_text corpus. Changing a single character changes every generated
// corpus and the frozen ratio in the tests.
inline constexpr std::string_view kMarkovSourceText =
    "The river runs past the old mill and under the stone bridge. In the spring the river is "
    "high and the mill wheel turns. In the summer the river is low and the mill wheel stands "
    "still. The children stand on the bridge and watch the river run past the mill. ";

}  // namespace lzae::detail

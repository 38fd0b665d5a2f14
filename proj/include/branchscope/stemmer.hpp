#pragma once

#include <string>
#include <string_view>

namespace branchscope {

// Porter (1980) suffix-stripping stemmer, original rule set. Expects a lowercase
// ASCII word; words of two letters or fewer are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace branchscope

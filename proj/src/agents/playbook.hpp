#pragma once

#include <string>
#include <string_view>

namespace mlfix::agents::detail {

struct PlaybookEntry {
    std::string_view key;  // check id, "dataset.*"/"checkpoint.*" finding id, or canonical cluster id
    std::string_view doc_id;
    std::string_view remediation;
    std::string_view hypothesis;  // empty: derive from the finding description
};

/// Entry for a check id, finding id or cluster id; a generic entry when
/// nothing matches.
const PlaybookEntry& playbook(std::string_view key);

}  // namespace mlfix::agents::detail

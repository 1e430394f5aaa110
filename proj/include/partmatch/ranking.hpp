#pragma once

#include <string>
#include <vector>

namespace partmatch {

/// One row of a ranked database: ties on score are broken by ascending id.
struct ScoredMap {
    std::string map_id;
    double score = 0.0;
};

using Ranking = std::vector<ScoredMap>;

}  // namespace partmatch

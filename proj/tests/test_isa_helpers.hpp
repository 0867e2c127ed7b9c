#pragma once

// Shared fixture graphs for the subspace-analysis test suites.

#include "lingd/graph.hpp"

namespace lingd_test {

// 6 vertices; 5 confounds {0,1} from outside the working set {0..4};
// target 2 has parents {0,1}, child 3, spouse 4
inline lingd::WeightedDigraph confounded_six() {
    lingd::WeightedDigraph g(6);
    g.add_edge(5, 0, 0.8);
    g.add_edge(5, 1, -0.7);
    g.add_edge(0, 2, 0.6);
    g.add_edge(1, 2, 0.7);
    g.add_edge(2, 3, 0.8);
    g.add_edge(4, 3, 0.5);
    return g;
}

}  // namespace lingd_test

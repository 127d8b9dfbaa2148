#pragma once

#include "popsim/dsl.hpp"
#include "popsim/library.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fixtures {

inline popsim::ProtocolSpec parse(const char* text) {
    return popsim::parse_protocol(text);
}

inline std::string fixture_path(const std::string& name) {
    return std::string(POPSIM_FIXTURE_DIR) + "/" + name;
}

/// Named protocols with at most 4 states.
inline std::vector<std::pair<std::string, popsim::ProtocolSpec>> small_protocols() {
    std::vector<std::pair<std::string, popsim::ProtocolSpec>> out;
    for (int m = 1; m <= 4; ++m)
        out.emplace_back("ladder" + std::to_string(m), popsim::ladder_protocol(m));
    out.emplace_back("elim", popsim::pairwise_elimination());
    for (const char* f : {"identity.pp", "split.pp", "majority.pp", "spread.pp"})
        out.emplace_back(f, popsim::load_protocol(fixture_path(f)));
    out.emplace_back("converge", parse("states A B\noutput A=1 B=1\nsym A B -> B B\n"));
    return out;
}

} // namespace fixtures

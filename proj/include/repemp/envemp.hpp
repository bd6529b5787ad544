#pragma once

#include <string>
#include <utility>
#include <vector>

#include "repemp/empowerment.hpp"

namespace repemp {

// Small grid MDP used as the environmental-empowerment baseline and as a
// second exerciser of the shared capacity solver. Actions are up, down,
// left, right, stay; blocked moves resolve to stay. With slip > 0 each move
// action stays put with probability slip instead.
struct GridMDP {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> blocked; // row-major, 1 = wall
    std::pair<int, int> start{0, 0};
    double slip = 0.0;
    int horizon = 1;

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool wall(int x, int y) const {
        return !in_bounds(x, y) || blocked[static_cast<std::size_t>(y) * width + x] != 0;
    }
};

// ASCII map: '#' wall, '.' floor, 'S' start (floor). Rows must be equal width.
GridMDP grid_from_map(const std::string& map_text);

// Grid scenario file: TOML with a [grid] table holding map (multi-line
// string), horizon, and optional slip.
GridMDP load_grid(const std::string& path);

// a_{1:T} -> s' channel from state s, fed to the shared capacity solver.
Channel grid_channel(const GridMDP& mdp, std::pair<int, int> s, int T, long long cap = 1000000);

EmpowermentReport env_empowerment(const GridMDP& mdp, std::pair<int, int> s, int T,
                                  double tol_bits = 1e-9, long long cap = 1000000);

} // namespace repemp

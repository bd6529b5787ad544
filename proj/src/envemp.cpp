#include "repemp/envemp.hpp"

#include <map>
#include <sstream>

#include "repemp/toml.hpp"

namespace repemp {

GridMDP grid_from_map(const std::string& map_text) {
    std::vector<std::string> rows;
    std::istringstream in(map_text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) rows.push_back(line);
    }
    if (rows.empty()) throw std::runtime_error("grid map is empty");

    GridMDP mdp;
    mdp.height = static_cast<int>(rows.size());
    mdp.width = static_cast<int>(rows[0].size());
    mdp.blocked.assign(static_cast<std::size_t>(mdp.width) * mdp.height, 0);
    bool has_start = false;
    for (int y = 0; y < mdp.height; ++y) {
        if (static_cast<int>(rows[static_cast<std::size_t>(y)].size()) != mdp.width)
            throw std::runtime_error("grid map rows have unequal width");
        for (int x = 0; x < mdp.width; ++x) {
            const char c = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            switch (c) {
            case '#': mdp.blocked[static_cast<std::size_t>(y) * mdp.width + x] = 1; break;
            case '.': break;
            case 'S':
                if (has_start) throw std::runtime_error("grid map has multiple starts");
                has_start = true;
                mdp.start = {x, y};
                break;
            default:
                throw std::runtime_error(std::string("grid map has unknown cell '") + c + "'");
            }
        }
    }
    if (!has_start) throw std::runtime_error("grid map has no start cell 'S'");
    return mdp;
}

GridMDP load_grid(const std::string& path) {
    const toml::Value root = toml::parse_file(path);
    const toml::Value& grid = root.at("grid");
    GridMDP mdp = grid_from_map(grid.at("map").as_string());
    mdp.horizon = static_cast<int>(grid.get_int("horizon", 1));
    mdp.slip = grid.get_float("slip", 0.0);
    if (mdp.slip < 0.0 || mdp.slip >= 1.0)
        throw std::runtime_error("grid slip must be in [0, 1)");
    return mdp;
}

namespace {

struct Act {
    const char* name;
    int dx, dy;
};
constexpr Act kActions[] = {
    {"up", 0, -1}, {"down", 0, 1}, {"left", -1, 0}, {"right", 1, 0}, {"stay", 0, 0}};

using StateDist = std::map<int, double>; // cell index -> probability

int cell_index(const GridMDP& m, int x, int y) { return y * m.width + x; }

StateDist step(const GridMDP& m, const StateDist& from, const Act& a) {
    StateDist out;
    for (const auto& [cell, p] : from) {
        const int x = cell % m.width;
        const int y = cell / m.width;
        int nx = x + a.dx;
        int ny = y + a.dy;
        if (m.wall(nx, ny)) { nx = x; ny = y; } // blocked moves resolve to stay
        const bool moves = nx != x || ny != y;
        if (m.slip > 0.0 && moves) {
            out[cell_index(m, nx, ny)] += p * (1.0 - m.slip);
            out[cell] += p * m.slip;
        } else {
            out[cell_index(m, nx, ny)] += p;
        }
    }
    return out;
}

} // namespace

Channel grid_channel(const GridMDP& mdp, std::pair<int, int> s, int T, long long cap) {
    if (mdp.wall(s.first, s.second)) throw std::runtime_error("start cell is a wall");
    const long long n_actions = 5;
    long long total = 1;
    for (int t = 0; t < T; ++t) {
        total *= n_actions;
        if (total > cap) throw EnumerationCapError(total, cap);
    }

    std::map<int, std::size_t> outcome_index;
    Channel ch;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    for (long long seq = 0; seq < total; ++seq) {
        StateDist dist{{cell_index(mdp, s.first, s.second), 1.0}};
        std::string label;
        long long v = seq;
        std::vector<int> acts(static_cast<std::size_t>(T));
        for (int t = T - 1; t >= 0; --t) {
            acts[static_cast<std::size_t>(t)] = static_cast<int>(v % n_actions);
            v /= n_actions;
        }
        for (int t = 0; t < T; ++t) {
            const Act& a = kActions[acts[static_cast<std::size_t>(t)]];
            if (t) label += ";";
            label += a.name;
            dist = step(mdp, dist, a);
        }
        std::vector<std::pair<std::size_t, double>> row;
        for (const auto& [cell, p] : dist) {
            auto it = outcome_index.find(cell);
            std::size_t col;
            if (it == outcome_index.end()) {
                col = outcome_index.size();
                outcome_index.emplace(cell, col);
                ch.outcome_keys.push_back(std::to_string(cell % mdp.width) + "," +
                                          std::to_string(cell / mdp.width));
            } else {
                col = it->second;
            }
            row.emplace_back(col, p);
        }
        ch.input_labels.push_back(std::move(label));
        rows.push_back(std::move(row));
    }

    ch.n_inputs = ch.input_labels.size();
    ch.n_outcomes = ch.outcome_keys.size();
    ch.matrix.assign(ch.n_inputs * ch.n_outcomes, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& [col, p] : rows[i]) ch.matrix[i * ch.n_outcomes + col] += p;
    return ch;
}

EmpowermentReport env_empowerment(const GridMDP& mdp, std::pair<int, int> s, int T,
                                  double tol_bits, long long cap) {
    const Channel ch = grid_channel(mdp, s, T, cap);
    auto [cap_bits, achieving] = capacity(ch, tol_bits);
    EmpowermentReport r = mi_decomposition(ch, achieving);
    r.capacity_bits = cap_bits;
    r.achieving_policy = std::move(achieving);
    r.estimator = Estimator::Capacity;
    return r;
}

} // namespace repemp

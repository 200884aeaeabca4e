#include "fpme/wasserstein1.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

namespace fpme {

namespace {

// Transportation simplex on the complete bipartite graph between excess and
// deficit cells. The basis is a spanning tree; entering arcs follow Bland's
// rule (first negative reduced cost in a fixed scan order), which cannot
// cycle even on the highly degenerate distance costs of a regular grid.
struct TransportationSimplex {
    int ns = 0, nt = 0;
    std::vector<double> supply, demand;
    const std::vector<std::vector<double>>& cost;

    struct Arc {
        int s, t;
        double flow;
    };
    std::vector<Arc> basis;
    std::vector<std::vector<int>> adj;  // node -> basis arc ids (nodes: 0..ns-1, ns..ns+nt-1)

    explicit TransportationSimplex(std::vector<double> a, std::vector<double> b,
                                   const std::vector<std::vector<double>>& c)
        : ns(static_cast<int>(a.size())), nt(static_cast<int>(b.size())),
          supply(std::move(a)), demand(std::move(b)), cost(c) {}

    void rebuild_adjacency() {
        adj.assign(ns + nt, {});
        for (int e = 0; e < static_cast<int>(basis.size()); ++e) {
            adj[basis[e].s].push_back(e);
            adj[ns + basis[e].t].push_back(e);
        }
    }

    // northwest-corner initial basic feasible solution: a staircase of exactly
    // ns + nt - 1 arcs (zero flows where supplies and demands tie out)
    void initialize() {
        basis.clear();
        std::vector<double> a = supply, b = demand;
        int i = 0, j = 0;
        while (static_cast<int>(basis.size()) < ns + nt - 1) {
            const double f = std::min(a[i], b[j]);
            basis.push_back({i, j, f});
            a[i] -= f;
            b[j] -= f;
            if (i == ns - 1 && j == nt - 1) break;
            if (j == nt - 1 || (a[i] <= b[j] && i < ns - 1))
                ++i;
            else
                ++j;
        }
        rebuild_adjacency();
    }

    void compute_duals(std::vector<double>& u, std::vector<double>& v) const {
        u.assign(ns, 0.0);
        v.assign(nt, 0.0);
        std::vector<char> seen(ns + nt, 0);
        std::deque<int> queue{0};
        seen[0] = 1;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            for (int e : adj[node]) {
                const Arc& arc = basis[e];
                const int other = node < ns ? ns + arc.t : arc.s;
                if (seen[other]) continue;
                seen[other] = 1;
                if (node < ns)
                    v[arc.t] = cost[arc.s][arc.t] - u[arc.s];
                else
                    u[arc.s] = cost[arc.s][arc.t] - v[arc.t];
                queue.push_back(other);
            }
        }
    }

    // tree path between the endpoints of the entering arc (s, ns+t)
    std::vector<int> tree_path(int from, int to) const {
        std::vector<int> parent_arc(ns + nt, -1), parent(ns + nt, -1);
        std::vector<char> seen(ns + nt, 0);
        std::deque<int> queue{from};
        seen[from] = 1;
        while (!queue.empty()) {
            const int node = queue.front();
            queue.pop_front();
            if (node == to) break;
            for (int e : adj[node]) {
                const Arc& arc = basis[e];
                const int other = node < ns ? ns + arc.t : arc.s;
                if (seen[other]) continue;
                seen[other] = 1;
                parent[other] = node;
                parent_arc[other] = e;
                queue.push_back(other);
            }
        }
        std::vector<int> arcs;
        for (int node = to; node != from; node = parent[node]) arcs.push_back(parent_arc[node]);
        std::reverse(arcs.begin(), arcs.end());
        return arcs;
    }

    double solve() {
        initialize();
        std::vector<double> u, v;
        const long max_pivots = 200L * (ns + nt) * (ns + nt) + 10000;
        for (long pivot = 0;; ++pivot) {
            if (pivot > max_pivots)
                throw std::runtime_error("w1_kantorovich: simplex pivot limit exceeded");
            compute_duals(u, v);
            int es = -1, et = -1;
            for (int i = 0; i < ns && es < 0; ++i)
                for (int j = 0; j < nt; ++j)
                    if (cost[i][j] - u[i] - v[j] < -1e-13) {
                        es = i;
                        et = j;
                        break;
                    }
            if (es < 0) break;  // optimal
            const auto arcs = tree_path(ns + et, es);  // path t -> s; entering closes the cycle
            // alternate -,+ starting from the entering arc's +delta; the leaving
            // arc is the lowest-id minimizer (Bland) so degenerate pivots cannot cycle
            double delta = 1e300;
            int leave = -1;
            double sign = -1.0;
            std::vector<double> signs(arcs.size());
            for (std::size_t idx = 0; idx < arcs.size(); ++idx) {
                const Arc& arc = basis[arcs[idx]];
                signs[idx] = sign;
                if (sign < 0 && (arc.flow < delta ||
                                 (leave >= 0 && arc.flow == delta && arcs[idx] < arcs[leave]))) {
                    delta = arc.flow;
                    leave = static_cast<int>(idx);
                }
                sign = -sign;
            }
            for (std::size_t idx = 0; idx < arcs.size(); ++idx)
                basis[arcs[idx]].flow += signs[idx] * delta;
            basis[arcs[leave]] = {es, et, delta};
            rebuild_adjacency();
        }
        double total = 0.0;
        for (const Arc& arc : basis) total += cost[arc.s][arc.t] * arc.flow;
        return total;
    }
};

}  // namespace

double w1_kantorovich(const DensityField& rho0, const DensityField& rho1) {
    if (!(rho0.grid == rho1.grid)) throw std::invalid_argument("w1_kantorovich: grid mismatch");
    const GridSpec& g = rho0.grid;
    if (g.cells > 1024) throw std::invalid_argument("w1_kantorovich: size limit exceeded (N <= 1024)");
    const double hd = g.cell_volume();
    std::vector<int> src, dst;
    std::vector<double> a, b;
    double excess_total = 0.0;
    for (std::int64_t i = 0; i < g.cells; ++i) {
        const double e = (rho0.values[i] - rho1.values[i]) * hd;
        if (e > 1e-15) {
            src.push_back(static_cast<int>(i));
            a.push_back(e);
            excess_total += e;
        } else if (e < -1e-15) {
            dst.push_back(static_cast<int>(i));
            b.push_back(-e);
        }
    }
    if (src.empty() || dst.empty()) return 0.0;
    // balance rounding drift so the transportation problem closes exactly
    double deficit_total = 0.0;
    for (double x : b) deficit_total += x;
    b.back() += excess_total - deficit_total;

    std::vector<std::vector<double>> cost(src.size(), std::vector<double>(dst.size()));
    for (std::size_t i = 0; i < src.size(); ++i)
        for (std::size_t j = 0; j < dst.size(); ++j)
            cost[i][j] = torus_distance(g, src[i], dst[j]);

    TransportationSimplex simplex(std::move(a), std::move(b), cost);
    return simplex.solve();
}

}  // namespace fpme

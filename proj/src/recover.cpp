#include "srcimg/recover.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "srcimg/errors.hpp"
#include "srcimg/lsq.hpp"

namespace srcimg {

namespace {

double step_of(double kmax) { return std::numbers::pi / (2.0 * kmax); }

// Least-squares point from constraints row_i . p = b_i; nullopt when rank deficient.
std::optional<Vec2> solve_points(const std::vector<Vec2>& rows, const std::vector<double>& b) {
    if (rows.size() < 2) return std::nullopt;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(rows.size()), 2);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        A(static_cast<Eigen::Index>(i), 0) = rows[i].x;
        A(static_cast<Eigen::Index>(i), 1) = rows[i].y;
        rhs[static_cast<Eigen::Index>(i)] = b[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-8);
    if (qr.rank() < 2) return std::nullopt;
    const Eigen::Vector2d p = qr.solve(rhs);
    return Vec2{p[0], p[1]};
}

double angle_between_lines(Vec2 a, Vec2 b) {
    // angle in [0, pi/2] between the lines spanned by a and b
    const double c = std::abs(dot(a, b)) / (norm(a) * norm(b));
    return std::acos(std::min(1.0, c));
}

}  // namespace

std::vector<DetectedLine> extract_lines(const std::vector<std::vector<JumpEvent>>& jumps, const ObservationSet& obs) {
    if (jumps.size() > obs.directions.size()) throw ArgumentError("more jump lists than directions");
    std::vector<DetectedLine> out;
    for (size_t l = 0; l < jumps.size(); ++l)
        for (const auto& e : jumps[l]) out.push_back({l, obs.directions[l], e.s0, e.cls, e.magnitude});
    return out;
}

std::vector<DetectedLine> extract_lines(const MeasurementSet& ms, const RecoverOptions& opt) {
    std::vector<DetectedLine> out;
    for (size_t l = 0; l < ms.obs.directions.size(); ++l) {
        const Vec2 xh = ms.obs.directions[l];
        const auto events = detect_jumps(ms, l, opt.detect);
        for (const auto& e : events) {
            if (e.cls != JumpClass::Blowup) continue;
            out.push_back({l, xh, e.s0, JumpClass::Blowup, e.magnitude});
        }
        if (opt.estimator == LineEstimator::Peaks) {
            for (const auto& e : events)
                if (e.cls == JumpClass::Finite) out.push_back({l, xh, e.s0, JumpClass::Finite, e.magnitude});
            continue;
        }
        for (const auto& a : fit_atoms(ms, l, opt.atoms)) out.push_back({l, xh, a.s, JumpClass::Finite, a.amplitude()});
    }
    return out;
}

std::vector<DetectedLine> drop_tangent_lines(const std::vector<DetectedLine>& lines,
                                             const std::vector<FittedCircle>& circles, double tol) {
    std::vector<DetectedLine> out;
    for (const auto& ln : lines) {
        bool tangent = false;
        for (const auto& c : circles) {
            const double m = dot(ln.xhat, c.center);
            tangent |= std::abs(ln.s0 - (m - c.radius)) <= tol || std::abs(ln.s0 - (m + c.radius)) <= tol;
        }
        if (ln.cls == JumpClass::Blowup || !tangent) out.push_back(ln);
    }
    return out;
}

VoteResult vote_corners(const std::vector<DetectedLine>& lines, size_t L, const SamplingGrid& grid, double rho,
                        double eps_d, bool parallel) {
    if (grid.P < 2 || grid.Q < 2) throw ArgumentError("vote grid needs at least 2x2 cells");
    if (!(rho > 0 && rho <= 1)) throw ArgumentError("quorum fraction must be in (0, 1]");
    if (!(eps_d > 0)) throw ArgumentError("distance tolerance must be positive");
    VoteResult res;
    res.quorum = std::max(2, static_cast<int>(std::ceil(rho * static_cast<double>(L) - 1e-9)));

    // Finite offsets per direction, sorted.
    std::map<size_t, std::pair<Vec2, std::vector<double>>> per_dir;
    for (const auto& ln : lines) {
        if (ln.cls != JumpClass::Finite) continue;
        auto& e = per_dir[ln.dir];
        e.first = ln.xhat;
        e.second.push_back(ln.s0);
    }
    for (auto& [l, e] : per_dir) std::sort(e.second.begin(), e.second.end());
    if (static_cast<size_t>(res.quorum) > L || static_cast<size_t>(res.quorum) > per_dir.size()) {
        res.warnings.push_back("quorum " + std::to_string(res.quorum) + " exceeds the " +
                               std::to_string(per_dir.size()) + " directions with finite lines");
        res.counts.assign(grid.P * grid.Q, 0);
        return res;
    }
    std::vector<std::pair<Vec2, std::vector<double>>> dirs;
    for (auto& [l, e] : per_dir) dirs.push_back(e);

    auto nearest = [](const std::vector<double>& offs, double v) {
        auto it = std::lower_bound(offs.begin(), offs.end(), v);
        double d = std::numeric_limits<double>::infinity();
        size_t j = 0;
        if (it != offs.end()) {
            d = *it - v;
            j = static_cast<size_t>(it - offs.begin());
        }
        if (it != offs.begin() && v - *(it - 1) < d) {
            d = v - *(it - 1);
            j = static_cast<size_t>(it - offs.begin()) - 1;
        }
        return std::pair{d, j};
    };

    // Rows are independent, so the partial counts of each row merge trivially.
    res.counts.assign(grid.P * grid.Q, 0);
    const long Qn = static_cast<long>(grid.Q);
#pragma omp parallel for schedule(static) if (parallel)
    for (long q = 0; q < Qn; ++q) {
        const double y = grid.y(static_cast<size_t>(q));
        for (size_t p = 0; p < grid.P; ++p) {
            const double x = grid.x(p);
            int c = 0;
            for (const auto& [xh, offs] : dirs)
                if (nearest(offs, xh.x * x + xh.y * y).first <= eps_d) ++c;
            res.counts[static_cast<size_t>(q) * grid.P + p] = c;
        }
    }

    // Connected blobs (4-neighbour) of cells reaching the quorum.
    std::vector<int> label(grid.P * grid.Q, -1);
    int nlab = 0;
    std::vector<Corner> corners;
    for (size_t start = 0; start < label.size(); ++start) {
        if (label[start] >= 0 || res.counts[start] < res.quorum) continue;
        std::vector<size_t> stack{start}, cells;
        label[start] = nlab;
        while (!stack.empty()) {
            const size_t c = stack.back();
            stack.pop_back();
            cells.push_back(c);
            const size_t p = c % grid.P, q = c / grid.P;
            const size_t nb[4] = {p > 0 ? c - 1 : c, p + 1 < grid.P ? c + 1 : c, q > 0 ? c - grid.P : c,
                                  q + 1 < grid.Q ? c + grid.P : c};
            for (size_t n : nb)
                if (label[n] < 0 && res.counts[n] >= res.quorum) {
                    label[n] = nlab;
                    stack.push_back(n);
                }
        }
        ++nlab;
        int best = 0;
        for (size_t c : cells) best = std::max(best, res.counts[c]);
        Vec2 seed{0, 0};
        int n = 0;
        for (size_t c : cells)
            if (res.counts[c] == best) {
                seed = seed + Vec2{grid.x(c % grid.P), grid.y(c / grid.P)};
                ++n;
            }
        Vec2 pt = seed * (1.0 / n);
        for (int it = 0; it < 3; ++it) {
            std::vector<Vec2> rows;
            std::vector<double> b;
            for (const auto& [xh, offs] : dirs) {
                const auto [d, j] = nearest(offs, dot(xh, pt));
                if (d <= eps_d) {
                    rows.push_back(xh);
                    b.push_back(offs[j]);
                }
            }
            if (auto s = solve_points(rows, b)) pt = *s;
        }
        corners.push_back({pt, best});
    }
    // A blob split by one under-voted cell refines to the same point twice.
    std::stable_sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) { return a.votes > b.votes; });
    for (const auto& c : corners) {
        bool dup = false;
        for (const auto& k : res.corners) dup |= norm(k.p - c.p) <= 2.0 * eps_d;
        if (!dup) res.corners.push_back(c);
    }
    return res;
}

std::vector<FittedCircle> assemble_circles(const std::vector<DetectedLine>& lines, double eps_r, double eps_c,
                                           int min_support) {
    std::map<size_t, std::pair<Vec2, std::vector<double>>> per_dir;
    for (const auto& ln : lines) {
        if (ln.cls != JumpClass::Blowup) continue;
        auto& e = per_dir[ln.dir];
        e.first = ln.xhat;
        e.second.push_back(ln.s0);
    }
    struct Cand {
        size_t dir;
        Vec2 xh;
        double mid, half;
        std::pair<size_t, size_t> ends[2];
    };
    std::vector<Cand> cands;
    for (auto& [l, e] : per_dir) {
        auto& o = e.second;
        std::sort(o.begin(), o.end());
        for (size_t i = 0; i < o.size(); ++i)
            for (size_t j = i + 1; j < o.size(); ++j)
                cands.push_back({l, e.first, 0.5 * (o[i] + o[j]), 0.5 * (o[j] - o[i]), {{l, i}, {l, j}}});
    }

    std::vector<FittedCircle> circles;
    std::set<std::pair<size_t, size_t>> consumed;
    for (;;) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < cands.size(); ++i)
            if (!consumed.count(cands[i].ends[0]) && !consumed.count(cands[i].ends[1])) idx.push_back(i);
        // Support of a hypothesis: best-matching candidate per direction.
        auto support = [&](Vec2 c, double r) {
            std::map<size_t, std::pair<double, size_t>> sup;
            for (size_t i : idx) {
                const auto& k = cands[i];
                const double er = std::abs(k.half - r), ec = std::abs(dot(k.xh, c) - k.mid);
                if (er > eps_r || ec > eps_c) continue;
                auto it = sup.find(k.dir);
                if (it == sup.end() || er + ec < it->second.first) sup[k.dir] = {er + ec, i};
            }
            return sup;
        };
        auto err = [](const std::map<size_t, std::pair<double, size_t>>& sup) {
            double e = 0.0;
            for (const auto& [l, v] : sup) e += v.first;
            return e;
        };
        // Largest support, then smallest total mismatch.
        std::map<size_t, std::pair<double, size_t>> best;
        for (size_t a : idx)
            for (size_t b : idx) {
                const auto &ca = cands[a], &cb = cands[b];
                if (cb.dir <= ca.dir || std::abs(ca.half - cb.half) > eps_r) continue;
                const double det = ca.xh.x * cb.xh.y - ca.xh.y * cb.xh.x;
                if (std::abs(det) < 0.2) continue;
                const Vec2 c{(ca.mid * cb.xh.y - cb.mid * ca.xh.y) / det, (ca.xh.x * cb.mid - cb.xh.x * ca.mid) / det};
                auto sup = support(c, 0.5 * (ca.half + cb.half));
                if (sup.size() > best.size() || (sup.size() == best.size() && err(sup) < err(best))) best = std::move(sup);
            }
        if (static_cast<int>(best.size()) < min_support) break;
        auto fit = [&](const std::map<size_t, std::pair<double, size_t>>& sup) {
            std::vector<Vec2> rows;
            std::vector<double> b;
            double r = 0.0;
            for (const auto& [l, v] : sup) {
                rows.push_back(cands[v.second].xh);
                b.push_back(cands[v.second].mid);
                r += cands[v.second].half;
            }
            return std::pair{solve_points(rows, b), r / static_cast<double>(sup.size())};
        };
        // Re-match every direction against the least-squares circle of the current support.
        for (int it = 0; it < 3; ++it) {
            const auto [c, r] = fit(best);
            if (!c) break;
            auto sup = support(*c, r);
            if (sup.size() < best.size()) break;
            best = std::move(sup);
        }
        for (const auto& [l, v] : best) {
            consumed.insert(cands[v.second].ends[0]);
            consumed.insert(cands[v.second].ends[1]);
        }
        const auto [c, r] = fit(best);
        if (!c) break;
        circles.push_back({*c, r, static_cast<int>(best.size())});
    }
    return circles;
}

std::vector<AnnulusEstimate> pair_annuluses(const std::vector<FittedCircle>& circles, double eps_c) {
    struct Cluster {
        Vec2 sum{0, 0};
        std::vector<double> radii;
        Vec2 center() const { return sum * (1.0 / static_cast<double>(radii.size())); }
    };
    std::vector<Cluster> clusters;
    for (const auto& c : circles) {
        Cluster* hit = nullptr;
        for (auto& k : clusters)
            if (norm(k.center() - c.center) <= eps_c) {
                hit = &k;
                break;
            }
        if (!hit) hit = &clusters.emplace_back();
        hit->sum = hit->sum + c.center;
        hit->radii.push_back(c.radius);
    }
    std::vector<AnnulusEstimate> out;
    for (auto& k : clusters) {
        std::sort(k.radii.begin(), k.radii.end());
        size_t i = 0;
        if (k.radii.size() % 2 == 1) out.push_back({k.center(), 0.0, k.radii[i++]});
        for (; i + 1 < k.radii.size(); i += 2) out.push_back({k.center(), k.radii[i], k.radii[i + 1]});
    }
    return out;
}

PeelResult peel_annuluses(const MeasurementSet& ms, const std::vector<AnnulusEstimate>& start) {
    PeelResult out{ms, start, std::vector<cplx>(start.size(), 0.0)};
    if (start.empty()) return out;
    const size_t nl = ms.obs.directions.size(), M = ms.M(), na = start.size();
    const Eigen::Index rows = static_cast<Eigen::Index>(nl * 2 * M);
    // Rows weighted by k^2 so the tangency singularities, not the low-k bulk, drive the fit.
    Eigen::VectorXd wt(rows);
    Eigen::VectorXcd y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const double k = ms.band.k(static_cast<size_t>(i) % M);
        wt[i] = k * k;
        y[i] = wt[i] * ms.values[static_cast<size_t>(i)];
    }

    // Parameters per annulus: cx, cy, r, R (r fixed at 0 for disks).
    auto unpack = [&](const Eigen::VectorXd& x, size_t j) {
        return AnnulusEstimate{{x[4 * j], x[4 * j + 1]}, start[j].r > 0 ? x[4 * j + 2] : 0.0, x[4 * j + 3]};
    };
    auto basis = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXcd B(rows, static_cast<Eigen::Index>(na));
        for (size_t j = 0; j < na; ++j) {
            const AnnulusEstimate a = unpack(x, j);
            for (size_t l = 0; l < nl; ++l)
                for (int sg = 0; sg < 2; ++sg) {
                    const Vec2 xh = sg == 0 ? ms.obs.directions[l] : -ms.obs.directions[l];
                    for (size_t m = 0; m < M; ++m) {
                        cplx v = disk_far_field_analytic(a.center, a.R, 1.0, xh, ms.band.k(m));
                        if (a.r > 0) v -= disk_far_field_analytic(a.center, a.r, 1.0, xh, ms.band.k(m));
                        const auto row = static_cast<Eigen::Index>((l * 2 + static_cast<size_t>(sg)) * M + m);
                        B(row, static_cast<Eigen::Index>(j)) = wt[row] * v;
                    }
                }
        }
        return B;
    };
    auto solve = [&](const Eigen::VectorXd& x, Eigen::VectorXcd* amp) {
        const Eigen::MatrixXcd B = basis(x);
        const Eigen::VectorXcd c = B.colPivHouseholderQr().solve(y);
        if (amp) *amp = c;
        const Eigen::VectorXcd r = y - B * c;
        Eigen::VectorXd out(2 * rows);
        out << r.real(), r.imag();
        return out;
    };
    Eigen::VectorXd x0(static_cast<Eigen::Index>(4 * na)), lo(x0.size()), hi(x0.size());
    for (size_t j = 0; j < na; ++j) {
        const auto& a = start[j];
        const double v[4] = {a.center.x, a.center.y, a.r, a.R};
        for (int t = 0; t < 4; ++t) {
            const Eigen::Index i = static_cast<Eigen::Index>(4 * j + static_cast<size_t>(t));
            x0[i] = v[t];
            lo[i] = v[t] - 0.1;
            hi[i] = v[t] + 0.1;
        }
        if (a.r <= 0) hi[static_cast<Eigen::Index>(4 * j + 2)] = lo[static_cast<Eigen::Index>(4 * j + 2)] = x0[static_cast<Eigen::Index>(4 * j + 2)] = 0.0;
        for (size_t t : {size_t{2}, size_t{3}})
            if (t == 3 || a.r > 0) lo[static_cast<Eigen::Index>(4 * j + t)] = std::max(1e-3, lo[static_cast<Eigen::Index>(4 * j + t)]);
    }
    BoundedLMOptions lmo;
    lmo.max_iter = 50;
    const Eigen::VectorXd x = bounded_lm([&](const Eigen::VectorXd& v) { return solve(v, nullptr); }, x0, lo, hi, lmo).x;
    Eigen::VectorXcd amp;
    solve(x, &amp);
    const Eigen::MatrixXcd B = basis(x);
    const Eigen::VectorXcd model = B * amp;
    for (Eigen::Index i = 0; i < rows; ++i) out.residual.values[static_cast<size_t>(i)] -= model[i] / wt[i];
    for (size_t j = 0; j < na; ++j) {
        out.refined[j] = unpack(x, j);
        out.amplitudes[j] = amp[static_cast<Eigen::Index>(j)];
    }
    return out;
}

double corner_factor(Vec2 e1, Vec2 e2, Vec2 xhat) {
    const Vec2 xp = perp(xhat);
    // Each edge ray is an end of the chord on the side of s0 it points to; it moves with
    // d tau/ds = (xp.e)/(xhat.e) and counts with + as an upper end, - as a lower end.
    auto term = [&](Vec2 e, Vec2 inward) {
        const double sigma = dot(xhat, e);
        const double c = dot(xp, e) / sigma;
        const double end = dot(inward, xp) < 0 ? 1.0 : -1.0;
        return (sigma > 0 ? 1.0 : -1.0) * end * c;
    };
    return term(e1, perp(e1)) + term(e2, -perp(e2));
}

std::vector<cplx> jumps_at(const MeasurementSet& ms, size_t l, const std::vector<double>& offsets,
                           const std::vector<double>& nuisance) {
    if (l >= ms.obs.directions.size()) throw ArgumentError("direction index out of range");
    const size_t M = ms.M();
    std::vector<double> k(M);
    std::vector<cplx> yp(M), ym(M);
    for (size_t m = 0; m < M; ++m) {
        k[m] = ms.band.k(m);
        yp[m] = k[m] * k[m] * ms.at(l, Sign::Plus, m);
        ym[m] = k[m] * k[m] * ms.at(l, Sign::Minus, m);
    }
    std::vector<Atom> atoms;
    for (double s : offsets) atoms.push_back({s, {}, {}});
    for (double s : nuisance) atoms.push_back({s, {}, {}});
    fit_amplitudes(k, yp, ym, atoms);
    std::vector<cplx> out;
    for (size_t i = 0; i < offsets.size(); ++i) out.push_back(-0.5 * (atoms[i].A + atoms[i].B));
    return out;
}

double projection_gap(const std::vector<Vec2>& corners, Vec2 xhat) {
    std::vector<double> s;
    for (auto p : corners) s.push_back(dot(xhat, p));
    std::sort(s.begin(), s.end());
    double g = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < s.size(); ++i) g = std::min(g, s[i] - s[i - 1]);
    return g;
}

std::optional<Vec2> generic_direction(const std::vector<Vec2>& corners, double min_gap, std::uint64_t seed,
                                      int max_draws) {
    std::mt19937_64 eng(seed);
    for (int i = 0; i < max_draws; ++i) {
        const double t = std::numbers::pi * static_cast<double>(eng() >> 11) * 0x1.0p-53;
        const Vec2 xh{std::cos(t), std::sin(t)};
        if (projection_gap(corners, xh) >= min_gap) return xh;
    }
    return std::nullopt;
}

std::vector<std::vector<size_t>> edge_cycles(size_t ncorners, const std::vector<EdgeResult>& edges) {
    std::vector<std::vector<size_t>> adj(ncorners);
    for (const auto& e : edges) {
        if (e.verdict != EdgeVerdict::Accepted) continue;
        if (e.a >= ncorners || e.b >= ncorners) throw ArgumentError("edge endpoint is not a corner");
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<std::vector<size_t>> cycles;
    std::vector<bool> seen(ncorners, false);
    for (size_t s = 0; s < ncorners; ++s) {
        if (seen[s] || adj[s].size() != 2) continue;
        std::vector<size_t> cyc{s};
        seen[s] = true;
        size_t prev = s, cur = adj[s][0];
        bool closed = false;
        while (adj[cur].size() == 2) {
            if (cur == s) {
                closed = true;
                break;
            }
            seen[cur] = true;
            cyc.push_back(cur);
            const size_t next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
            prev = cur;
            cur = next;
        }
        if (!closed || cyc.size() < 3) continue;
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

std::vector<CornerValue> corner_values(const std::vector<Vec2>& corners, const std::vector<EdgeResult>& edges,
                                       const MeasurementSet& ms, size_t l0) {
    if (l0 >= ms.obs.directions.size()) throw ArgumentError("direction index out of range");
    const Vec2 x0 = ms.obs.directions[l0];
    const double need = 3.0 * step_of(ms.band.kmax());
    if (corners.size() > 1 && projection_gap(corners, x0) < need)
        throw ArgumentError("direction does not separate the corner projections by 3 h_s; draw another direction");
    std::vector<double> offs;
    for (auto p : corners) offs.push_back(dot(x0, p));
    const auto J = jumps_at(ms, l0, offs);

    // Oriented neighbours from closed cycles; plain neighbours from accepted edges.
    std::vector<std::optional<std::pair<size_t, size_t>>> oriented(corners.size());
    for (auto cyc : edge_cycles(corners.size(), edges)) {
        double area = 0.0;
        for (size_t i = 0; i < cyc.size(); ++i) area += cross(corners[cyc[i]], corners[cyc[(i + 1) % cyc.size()]]);
        if (area < 0) std::reverse(cyc.begin(), cyc.end());
        for (size_t i = 0; i < cyc.size(); ++i)
            oriented[cyc[i]] = std::pair{cyc[(i + 1) % cyc.size()], cyc[(i + cyc.size() - 1) % cyc.size()]};
    }
    std::vector<std::vector<size_t>> adj(corners.size());
    for (const auto& e : edges)
        if (e.verdict == EdgeVerdict::Accepted) {
            adj[e.a].push_back(e.b);
            adj[e.b].push_back(e.a);
        }

    std::vector<CornerValue> out;
    for (size_t i = 0; i < corners.size(); ++i) {
        CornerValue cv{i, J[i], ValueFlag::Indeterminate};
        size_t na, nb;
        if (oriented[i]) {
            na = oriented[i]->first;
            nb = oriented[i]->second;
            cv.flag = ValueFlag::Signed;
        } else if (adj[i].size() == 2) {
            na = adj[i][0];
            nb = adj[i][1];
            cv.flag = ValueFlag::MagnitudeOnly;
        } else {
            out.push_back(cv);
            continue;
        }
        const double g = corner_factor(corners[na] - corners[i], corners[nb] - corners[i], x0);
        if (!std::isfinite(g) || std::abs(g) < 1e-6) {
            cv.flag = ValueFlag::Indeterminate;
        } else if (cv.flag == ValueFlag::Signed) {
            cv.value = J[i] / g;
        } else {
            cv.value = std::abs(J[i]) / std::abs(g);
        }
        out.push_back(cv);
    }
    return out;
}

std::vector<EdgeResult> identify_edges(const std::vector<Vec2>& corners, const MeasurementOracle* oracle,
                                       const EdgeOptions& opt) {
    const size_t N = corners.size();
    std::vector<EdgeResult> out;
    for (size_t a = 0; a < N; ++a)
        for (size_t b = a + 1; b < N; ++b) out.push_back({a, b, EdgeVerdict::Undecided, "", 0, 0, 0, 0});
    if (out.empty()) return out;
    if (!oracle || !*oracle) {
        for (auto& e : out) e.reason = "insufficient data: no measurement oracle";
        return out;
    }
    if (opt.lambda < 1 || opt.lambda_cap < opt.lambda) throw ArgumentError("bad edge test band");
    const int budget = opt.budget > 0 ? opt.budget : static_cast<int>(1 + N * (N - 1) / 2);
    int used = 0;
    auto hs_of = [](int lam) { return step_of(static_cast<double>(lam)); };

    // Jumps at every corner along a generic direction.
    std::optional<Vec2> x0;
    int lam0 = opt.lambda;
    for (; lam0 <= opt.lambda_cap; lam0 *= 2)
        if ((x0 = generic_direction(corners, opt.min_sep_steps * hs_of(lam0), opt.seed))) break;
    if (!x0 || used >= budget) {
        for (auto& e : out) e.reason = "no separating generic direction within the band cap";
        return out;
    }
    ++used;
    std::vector<double> offs0;
    for (auto p : corners) offs0.push_back(dot(*x0, p));
    const MeasurementSet ms0 = (*oracle)(ObservationSet::from_directions({*x0}), WaveBand(lam0));
    const auto J0 = jumps_at(ms0, 0, offs0);

    for (auto& e : out) {
        const size_t i = e.a, n0 = e.b;
        const Vec2 P = corners[i], edge = corners[n0] - P;
        const double len = norm(edge);
        // Nearest-corner screen: another corner on the open segment blocks the edge.
        bool blocked = false;
        for (size_t n = 0; n < N; ++n) {
            if (n == i || n == n0) continue;
            const Vec2 d = corners[n] - P;
            const double t = dot(d, edge) / (len * len);
            if (t > 0 && t < 1 && std::abs(cross(edge, d)) / len <= 1e-3 * len) blocked = true;
        }
        if (blocked) {
            e.verdict = EdgeVerdict::Rejected;
            e.reason = "another corner lies on the segment";
            continue;
        }
        double theta1 = std::numbers::pi / 2;
        for (size_t n = 0; n < N; ++n) {
            if (n == i || n == n0) continue;
            const double ang = angle_between_lines(corners[n] - P, edge);
            if (ang > 1e-9) theta1 = std::min(theta1, ang);
        }
        // Candidate values of f(P) over ordered pairs of candidate incident edges.
        double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < N; ++a)
            for (size_t b = 0; b < N; ++b) {
                if (a == i || b == i || a == b) continue;
                const double g = corner_factor(corners[a] - P, corners[b] - P, *x0);
                if (!std::isfinite(g) || std::abs(g) < 1e-6) continue;
                const double f = std::abs(J0[i]) / std::abs(g);
                fmax = std::max(fmax, f);
                fmin = std::min(fmin, f);
            }
        if (!(fmin > 0) || !std::isfinite(fmin)) {
            e.reason = "no usable candidate amplitude at the corner";
            continue;
        }
        const double cot_half = 1.0 / std::tan(theta1 / 2);
        const double phi_max = std::atan(1.0 / (cot_half * (1.0 + 2.0 * fmax / fmin)));
        e.threshold = 2.0 * cot_half * fmax;
        if (used >= budget) {
            e.reason = "direction budget exhausted";
            continue;
        }
        // Test direction: the edge normal turned by phi < phi_max, with P's projection
        // isolated from every other corner.
        const Vec2 nrm = perp(edge) * (1.0 / len);
        std::optional<Vec2> x1;
        int lam = opt.lambda;
        for (; lam <= opt.lambda_cap && !x1; lam = lam * 3 / 2) {
            const double need = opt.min_sep_steps * hs_of(lam);
            for (double frac : {0.9, 0.7, 0.5, 0.3}) {
                for (double sgn : {1.0, -1.0}) {
                    const double phi = sgn * frac * phi_max;
                    const Vec2 d{std::cos(phi) * nrm.x - std::sin(phi) * nrm.y,
                                 std::sin(phi) * nrm.x + std::cos(phi) * nrm.y};
                    bool ok = true;
                    for (size_t n = 0; n < N && ok; ++n)
                        if (n != i) ok = std::abs(dot(d, corners[n] - P)) >= need;
                    if (ok) {
                        x1 = d;
                        break;
                    }
                }
                if (x1) break;
            }
            if (x1) break;
        }
        if (!x1) {
            e.reason = "test direction needs a band above the cap";
            continue;
        }
        ++used;
        std::vector<double> offs;
        for (auto p : corners) offs.push_back(dot(*x1, p));
        // Merge projections of other corners that coincide, keeping P's atom first.
        std::vector<double> atoms{offs[i]};
        const double hs = hs_of(lam);
        for (size_t n = 0; n < N; ++n) {
            if (n == i) continue;
            bool dup = false;
            for (double s : atoms) dup |= std::abs(s - offs[n]) < 0.5 * hs;
            if (!dup) atoms.push_back(offs[n]);
        }
        const MeasurementSet ms1 = (*oracle)(ObservationSet::from_directions({*x1}), WaveBand(lam));
        const auto J1 = jumps_at(ms1, 0, atoms);
        e.measured = std::abs(J1[0]);
        e.test_angle = std::atan2(x1->y, x1->x);
        e.test_lambda = lam;
        e.verdict = e.measured > e.threshold ? EdgeVerdict::Accepted : EdgeVerdict::Rejected;
        e.reason = e.verdict == EdgeVerdict::Accepted ? "jump above the fake-edge bound" : "jump below the fake-edge bound";
    }
    return out;
}

ReconstructionReport reconstruct(const MeasurementSet& ms, const RecoverOptions& opt,
                                 const MeasurementOracle* oracle, const EdgeOptions& eopt) {
    ReconstructionReport rep;
    const double hs = step_of(ms.band.kmax());
    rep.lines = extract_lines(ms, opt);
    // A circle has tangents in every direction, so it must reach the same quorum as a corner.
    const int L = static_cast<int>(ms.obs.directions.size());
    const int support = std::max(opt.min_support, static_cast<int>(std::ceil(opt.rho * L - 1e-9)));
    rep.circles = assemble_circles(rep.lines, opt.eps_r, opt.eps_c, support);
    rep.annuluses = pair_annuluses(rep.circles, opt.eps_c);
    std::vector<DetectedLine> kept;
    if (opt.peel_annuluses && !rep.annuluses.empty()) {
        const auto peel = peel_annuluses(ms, rep.annuluses);
        RecoverOptions finite = opt;
        for (const auto& ln : extract_lines(peel.residual, finite))
            if (ln.cls == JumpClass::Finite) kept.push_back(ln);
        kept = drop_tangent_lines(kept, rep.circles, opt.tangent_exclusion * hs);
    } else {
        kept = drop_tangent_lines(rep.lines, rep.circles, opt.tangent_exclusion * hs);
    }
    auto vr = vote_corners(kept, ms.obs.directions.size(), opt.grid, opt.rho, opt.eps_d);
    rep.corners = vr.corners;
    rep.quorum = vr.quorum;
    rep.warnings = vr.warnings;
    if (rep.corners.empty()) return rep;

    std::vector<Vec2> pts;
    for (const auto& c : rep.corners) pts.push_back(c.p);
    rep.edges = identify_edges(pts, oracle, eopt);
    if (pts.size() == 1) return rep;
    if (oracle && *oracle) {
        const int lam = ms.band.Lambda;
        if (auto x0 = generic_direction(pts, 3.0 * hs, eopt.seed + 1)) {
            const auto m0 = (*oracle)(ObservationSet::from_directions({*x0}), WaveBand(lam));
            rep.corner_values = corner_values(pts, rep.edges, m0, 0);
        } else {
            rep.warnings.push_back("no direction separates the corner projections; corner values skipped");
        }
        return rep;
    }
    size_t best = 0;
    double gap = -1.0;
    for (size_t l = 0; l < ms.obs.directions.size(); ++l) {
        const double g = projection_gap(pts, ms.obs.directions[l]);
        if (g > gap) {
            gap = g;
            best = l;
        }
    }
    if (gap >= 3.0 * hs)
        rep.corner_values = corner_values(pts, rep.edges, ms, best);
    else
        rep.warnings.push_back("no measured direction separates the corner projections; corner values skipped");
    return rep;
}

}  // namespace srcimg

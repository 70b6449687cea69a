#include "sdsearch/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <unordered_map>
#include <unordered_set>

#include "sdsearch/common.hpp"
#include "sdsearch/policy.hpp"
#include "sdsearch/reservation.hpp"
#include "sdsearch/rng.hpp"

namespace sdsearch {

namespace {

constexpr double kActionSlack = 1e-9;

struct Atoms {
    std::vector<double> xv, px, yv, py;
};

Atoms atoms_of(const DiscreteInstance& inst) {
    Atoms a;
    a.xv = inst.x_dist.values();
    a.px = inst.x_dist.probs();
    a.yv = inst.y_dist.values();
    a.py = inst.y_dist.probs();
    return a;
}

// State of the exact solver: the first `discovered` products have known x,
// `mask` marks inspected products (known y), and xi/yi hold atom indices for
// everything revealed so far. Packs into 23 bits for memoization.
struct State {
    int discovered = 0;
    unsigned mask = 0;
    std::array<std::uint8_t, 4> xi{{0, 0, 0, 0}};
    std::array<std::uint8_t, 4> yi{{0, 0, 0, 0}};

    std::uint32_t key() const {
        std::uint32_t k = static_cast<std::uint32_t>(discovered);
        k |= mask << 3u;
        for (int j = 0; j < 4; ++j) {
            k |= static_cast<std::uint32_t>(xi[j]) << (7u + 2u * j);
            k |= static_cast<std::uint32_t>(yi[j]) << (15u + 2u * j);
        }
        return k;
    }
};

class ExactSolver {
  public:
    ExactSolver(const DiscreteInstance& inst, const ReservationBundle* bundle)
        : inst_(inst), a_(atoms_of(inst)), bundle_(bundle) {}

    // Optimal continuation value by backward induction.
    double optimal(const State& s) {
        auto it = memo_.find(s.key());
        if (it != memo_.end()) return it->second;
        double best = buy_value(s);
        for (int j = 0; j < s.discovered; ++j) {
            if (s.mask & (1u << j)) continue;
            best = std::max(best, inspect_value(s, j, /*optimal_continuation=*/true));
        }
        if (s.discovered < inst_.num_products)
            best = std::max(best, discover_value(s, /*optimal_continuation=*/true));
        memo_.emplace(s.key(), best);
        return best;
    }

    // Value of following the threshold policy from this state onward.
    double policy(const State& s) {
        auto it = policy_memo_.find(s.key());
        if (it != policy_memo_.end()) return it->second;
        const auto act = policy_action(s);
        double v = 0.0;
        switch (act.kind) {
            case ActionKind::buy: v = buy_value(s); break;
            case ActionKind::inspect: v = inspect_value(s, act.target, false); break;
            case ActionKind::discover: v = discover_value(s, false); break;
        }
        policy_memo_.emplace(s.key(), v);
        return v;
    }

    // Checks, over every state the threshold policy can reach, that its action
    // attains the optimal state value when followed by optimal play.
    void audit(const State& s, PolicyAudit* out) {
        if (!audited_.insert(s.key()).second) return;
        ++out->states_checked;
        const double opt = optimal(s);
        const auto act = policy_action(s);
        double q = 0.0;
        switch (act.kind) {
            case ActionKind::buy: q = buy_value(s); break;
            case ActionKind::inspect: q = inspect_value(s, act.target, true); break;
            case ActionKind::discover: q = discover_value(s, true); break;
        }
        if (q < opt - kActionSlack) ++out->suboptimal_states;
        // Recurse into every child the policy action can produce.
        if (act.kind == ActionKind::inspect) {
            for (std::size_t k = 0; k < a_.yv.size(); ++k) {
                State c = s;
                c.mask |= 1u << act.target;
                c.yi[static_cast<std::size_t>(act.target)] = static_cast<std::uint8_t>(k);
                audit(c, out);
            }
        } else if (act.kind == ActionKind::discover) {
            const int batch = batch_size(s);
            const std::size_t kx = a_.xv.size();
            std::size_t combos = 1;
            for (int b = 0; b < batch; ++b) combos *= kx;
            for (std::size_t combo = 0; combo < combos; ++combo) {
                State c = s;
                std::size_t rem = combo;
                for (int b = 0; b < batch; ++b) {
                    c.xi[static_cast<std::size_t>(s.discovered + b)] =
                        static_cast<std::uint8_t>(rem % kx);
                    rem /= kx;
                }
                c.discovered = s.discovered + batch;
                audit(c, out);
            }
        }
    }

    double root_value(bool follow_policy) {
        const int s0 = inst_.s0_count;
        if (s0 == 0) {
            State s;
            return follow_policy ? policy(s) : optimal(s);
        }
        // Aware-from-the-start products have known x: integrate it out.
        const std::size_t kx = a_.xv.size();
        std::size_t combos = 1;
        for (int j = 0; j < s0; ++j) combos *= kx;
        double v = 0.0;
        for (std::size_t combo = 0; combo < combos; ++combo) {
            State s;
            s.discovered = s0;
            double p = 1.0;
            std::size_t rem = combo;
            for (int j = 0; j < s0; ++j) {
                const std::size_t k = rem % kx;
                rem /= kx;
                s.xi[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(k);
                p *= a_.px[k];
            }
            v += p * (follow_policy ? policy(s) : optimal(s));
        }
        return v;
    }

    void audit_roots(PolicyAudit* out) {
        const int s0 = inst_.s0_count;
        if (s0 == 0) {
            State s;
            audit(s, out);
            return;
        }
        const std::size_t kx = a_.xv.size();
        std::size_t combos = 1;
        for (int j = 0; j < s0; ++j) combos *= kx;
        for (std::size_t combo = 0; combo < combos; ++combo) {
            State s;
            s.discovered = s0;
            std::size_t rem = combo;
            for (int j = 0; j < s0; ++j) {
                s.xi[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(rem % kx);
                rem /= kx;
            }
            audit(s, out);
        }
    }

  private:
    int batch_size(const State& s) const {
        return std::min(inst_.n_d, inst_.num_products - s.discovered);
    }

    double utility(const State& s, int j) const {
        return a_.xv[s.xi[static_cast<std::size_t>(j)]] +
               a_.yv[s.yi[static_cast<std::size_t>(j)]];
    }

    double buy_value(const State& s) const {
        double best = inst_.u_0;
        for (int j = 0; j < s.discovered; ++j)
            if (s.mask & (1u << j)) best = std::max(best, utility(s, j));
        return best;
    }

    double inspect_value(State s, int j, bool optimal_continuation) {
        double v = -inst_.c_s;
        s.mask |= 1u << j;
        for (std::size_t k = 0; k < a_.yv.size(); ++k) {
            s.yi[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(k);
            v += a_.py[k] * (optimal_continuation ? optimal(s) : policy(s));
        }
        return v;
    }

    double discover_value(const State& s, bool optimal_continuation) {
        const int batch = batch_size(s);
        const std::size_t kx = a_.xv.size();
        std::size_t combos = 1;
        for (int b = 0; b < batch; ++b) combos *= kx;
        double v = -inst_.c_d;
        for (std::size_t combo = 0; combo < combos; ++combo) {
            State c = s;
            double p = 1.0;
            std::size_t rem = combo;
            for (int b = 0; b < batch; ++b) {
                const std::size_t k = rem % kx;
                rem /= kx;
                c.xi[static_cast<std::size_t>(s.discovered + b)] =
                    static_cast<std::uint8_t>(k);
                p *= a_.px[k];
            }
            c.discovered = s.discovered + batch;
            v += p * (optimal_continuation ? optimal(c) : policy(c));
        }
        return v;
    }

    struct PolicyChoice {
        ActionKind kind = ActionKind::buy;
        int target = -1;
    };

    // Threshold policy: compare the best purchase value, the best inspection
    // threshold, and the discovery threshold; weak ties resolve toward the
    // cheaper-information action (buy over inspect over discover).
    PolicyChoice policy_action(const State& s) const {
        const double buy = buy_value(s);
        double best_zs = 0.0;
        int target = -1;
        for (int j = 0; j < s.discovered; ++j) {
            if (s.mask & (1u << j)) continue;
            const double zs = a_.xv[s.xi[static_cast<std::size_t>(j)]] + xi_threshold();
            if (target < 0 || zs > best_zs) {
                best_zs = zs;
                target = j;
            }
        }
        const bool can_discover = s.discovered < inst_.num_products;
        const double zd = can_discover ? bundle_->z_d_for_batch(batch_size(s)) : 0.0;
        const bool buy_beats_inspect = target < 0 || buy >= best_zs;
        const bool buy_beats_discover = !can_discover || buy >= zd;
        if (buy_beats_inspect && buy_beats_discover) return {ActionKind::buy, -1};
        if (target >= 0 && (!can_discover || best_zs >= zd))
            return {ActionKind::inspect, target};
        return {ActionKind::discover, -1};
    }

    double xi_threshold() const { return bundle_->require_xi(); }

    const DiscreteInstance& inst_;
    Atoms a_;
    const ReservationBundle* bundle_;
    std::unordered_map<std::uint32_t, double> memo_;
    std::unordered_map<std::uint32_t, double> policy_memo_;
    std::unordered_set<std::uint32_t> audited_;
};

}  // namespace

void DiscreteInstance::validate() const {
    if (x_dist.family() != Family::discrete && x_dist.family() != Family::point_mass)
        throw config_error("discrete instance requires a discrete pre-inspection distribution");
    if (y_dist.family() != Family::discrete && y_dist.family() != Family::point_mass)
        throw config_error("discrete instance requires a discrete match distribution");
    if (num_products < 1 || num_products > 4)
        throw config_error("discrete instance supports 1..4 products");
    if (x_dist.values().size() > 4 || y_dist.values().size() > 4)
        throw config_error("discrete instance supports at most 4 atoms per distribution");
    if (n_d < 1) throw config_error("products per discovery must be >= 1");
    if (s0_count < 0 || s0_count > num_products)
        throw config_error("initial awareness count out of range");
    if (!(c_s > 0.0) || !(c_d > 0.0)) throw config_error("search costs must be positive");
}

SearchEnvironment DiscreteInstance::environment() const {
    SearchEnvironment env;
    env.mode = Mode::SD;
    env.n_d = n_d;
    env.c_s = c_s;
    env.c_d = c_d;
    env.u_0 = u_0;
    env.num_products = num_products;
    return env;
}

double dp_value(const DiscreteInstance& inst) {
    inst.validate();
    ExactSolver solver(inst, nullptr);
    return solver.root_value(/*follow_policy=*/false);
}

PolicyAudit verify_policy_optimality(const DiscreteInstance& inst,
                                     const ReservationBundle& bundle) {
    inst.validate();
    ExactSolver solver(inst, &bundle);
    PolicyAudit out;
    out.dp = solver.root_value(false);
    out.policy_value = solver.root_value(true);
    solver.audit_roots(&out);
    return out;
}

PurchaseAudit verify_eventual_purchase(const DiscreteInstance& inst,
                                       const ReservationBundle& bundle,
                                       const PositionBonus& f) {
    inst.validate();
    const Atoms a = atoms_of(inst);
    const SearchEnvironment env = inst.environment();
    const int J = inst.num_products;
    const std::size_t kx = a.xv.size();
    const std::size_t ky = a.yv.size();
    std::size_t x_combos = 1, y_combos = 1;
    for (int j = 0; j < J; ++j) {
        x_combos *= kx;
        y_combos *= ky;
    }

    PurchaseAudit out;
    out.purchase_prob.assign(static_cast<std::size_t>(J) + 1, 0.0);

    ConsumerProblem problem;
    problem.num_products = J;
    problem.s0_count = inst.s0_count;

    std::vector<double> xs(static_cast<std::size_t>(J)), ys(static_cast<std::size_t>(J));
    std::vector<ProductView> views(static_cast<std::size_t>(J));
    for (std::size_t xc = 0; xc < x_combos; ++xc) {
        double px = 1.0;
        std::size_t rem = xc;
        for (int j = 0; j < J; ++j) {
            const std::size_t k = rem % kx;
            rem /= kx;
            xs[static_cast<std::size_t>(j)] = a.xv[k];
            px *= a.px[k];
        }
        for (std::size_t yc = 0; yc < y_combos; ++yc) {
            double p = px;
            rem = yc;
            for (int j = 0; j < J; ++j) {
                const std::size_t k = rem % ky;
                rem /= ky;
                ys[static_cast<std::size_t>(j)] = a.yv[k];
                p *= a.py[k];
            }

            VectorDraws draws(xs, ys);
            const Trajectory traj = simulate_consumer(env, bundle, problem, draws);

            for (int j = 0; j < J; ++j) {
                auto& v = views[static_cast<std::size_t>(j)];
                v.id = j + 1;
                v.x = xs[static_cast<std::size_t>(j)];
                v.y = ys[static_cast<std::size_t>(j)];
                v.in_c0 = false;
                v.in_s0 = j < inst.s0_count;
                v.position = v.in_s0 ? 0 : (j - inst.s0_count) / inst.n_d + 1;
                v.batch_size =
                    v.in_s0 ? 0
                            : std::min<int>(inst.n_d, J - inst.s0_count -
                                                          (v.position - 1) * inst.n_d);
            }
            const std::int64_t predicted = eventual_purchase(views, inst.u_0, bundle, f);

            // The realized purchase must attain the maximal effective value;
            // index-level disagreement is only legitimate under exact ties.
            const auto base_of = [&](std::int64_t id) {
                return id == 0 ? effective_outside_value(inst.u_0).base
                               : effective_value(views[static_cast<std::size_t>(id - 1)],
                                                 bundle, f)
                                     .base;
            };
            const double best_base = base_of(predicted);
            double max_base = effective_outside_value(inst.u_0).base;
            for (const auto& v : views)
                max_base = std::max(max_base, effective_value(v, bundle, f).base);
            const double gap = max_base - base_of(traj.purchased);
            out.max_value_gap = std::max(out.max_value_gap, gap);
            if (gap > 1e-9 || std::abs(best_base - max_base) > 1e-12) ++out.mismatches;
            out.purchase_prob[static_cast<std::size_t>(traj.purchased)] += p;
            ++out.paths;
        }
    }
    return out;
}

std::vector<DiscreteInstance> generate_corpus(std::size_t count, std::uint64_t seed,
                                              int max_products, int max_support,
                                              int max_n_d) {
    if (max_products < 1 || max_products > 4 || max_support < 1 || max_support > 4)
        throw config_error("corpus bounds must stay within 1..4");
    RandomStream rng(seed, /*stream_id=*/0x0C);
    std::vector<DiscreteInstance> corpus;
    corpus.reserve(count);
    const auto draw_int = [&](int lo, int hi) {
        return lo + static_cast<int>(rng.next_uniform01() * (hi - lo + 1));
    };
    const auto draw_range = [&](double lo, double hi) {
        return lo + (hi - lo) * rng.next_uniform01();
    };
    const auto draw_discrete = [&](int atoms, double lo, double hi) {
        std::vector<double> vals(static_cast<std::size_t>(atoms));
        std::vector<double> wts(static_cast<std::size_t>(atoms));
        for (auto& v : vals) v = draw_range(lo, hi);
        double total = 0.0;
        for (auto& w : wts) {
            w = draw_range(0.15, 1.0);
            total += w;
        }
        for (auto& w : wts) w /= total;
        if (atoms == 1) return Distribution::point_mass(vals[0]);
        return Distribution::discrete(vals, wts);
    };

    while (corpus.size() < count) {
        DiscreteInstance inst;
        inst.num_products = draw_int(1, max_products);
        inst.n_d = draw_int(1, max_n_d);
        inst.s0_count = draw_int(0, std::min(1, inst.num_products));
        inst.x_dist = draw_discrete(draw_int(1, max_support), -2.0, 2.5);
        inst.y_dist = draw_discrete(draw_int(1, max_support), -2.0, 2.5);
        inst.c_s = draw_range(0.02, 0.35);
        inst.c_d = draw_range(0.02, 0.30);
        inst.u_0 = draw_range(-1.5, 1.5);
        try {
            inst.validate();
            ValuationModel m{inst.x_dist, inst.y_dist, true};
            (void)compute_reservations(m, inst.environment());
        } catch (const solver_error&) {
            continue;  // thresholds undefined for this draw; redraw
        } catch (const config_error&) {
            continue;
        }
        corpus.push_back(std::move(inst));
    }
    return corpus;
}

}  // namespace sdsearch

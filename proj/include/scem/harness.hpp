#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scem/env.hpp"
#include "scem/errors.hpp"
#include "scem/sce.hpp"
#include "scem/td.hpp"

namespace scem {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string name;  // used in output file names
    std::string env;   // baird-perfect | baird-imperfect | ring | random-rbf |
                       // random-fourier | cartpole | pendulum5
    double gamma = 0.9;
    long budget = 100000;
    long stride = 100;
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> algs{"sce"};

    StepSeq alpha{0.001, 0.0};
    StepSeq beta{0.05, 0.0};
    StepSeq c_seq{0.01, 0.0};
    double eps1 = 0.9;
    double lambda = 0.15;
    double rho = 0.1;
    double r = 1.0;
    double q = 5.0;       // theta0 = (mu0, q I)
    double mu0 = 0.0;     // fill value for the initial mean
    long warmup = 0;

    int n = 0;            // random-MDP state count
    int k = 0;            // random-MDP feature count
    std::vector<std::uint64_t> model_seeds{0};
    SampleMode mode = SampleMode::IidFromNu;
    bool standardize = false;
    double lstd_ridge = 0.0;
    double z0 = 0.0;      // fill value for baseline initial vectors
    std::set<std::string> expected_diverge;
    long oracle_samples = 1000000;
    std::string out_dir = "out";

    Schedule schedule() const {
        Schedule s;
        s.alpha = alpha;
        s.beta = beta;
        s.c_seq = c_seq;
        s.epsilon1 = eps1;
        s.lambda = lambda;
        s.rho = rho;
        s.r = r;
        s.warmup_steps = warmup;
        return s;
    }

    void validate() const {
        static const std::set<std::string> envs{
            "baird-perfect", "baird-imperfect", "ring",
            "random-rbf",    "random-fourier",  "cartpole", "pendulum5"};
        static const std::set<std::string> known_algs{
            "sce", "td0", "gtd2", "rg", "lstd", "rlstd", "lspe"};
        if (!envs.count(env)) throw std::invalid_argument("unknown env: " + env);
        if (budget < 0) throw std::invalid_argument("budget must be >= 0");
        if (stride < 1) throw std::invalid_argument("stride must be >= 1");
        if (seeds.empty()) throw std::invalid_argument("at least one seed required");
        if (algs.empty()) throw std::invalid_argument("at least one algorithm required");
        for (const auto& a : algs)
            if (!known_algs.count(a)) throw std::invalid_argument("unknown algorithm: " + a);
        for (const auto& a : expected_diverge)
            if (!known_algs.count(a))
                throw std::invalid_argument("unknown algorithm in expected_diverge: " + a);
        if (env.rfind("random-", 0) == 0 && (n < 2 || k < 1))
            throw std::invalid_argument("random MDP env requires n and k");
        if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma in [0,1)");
        schedule().validate();
    }
};

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

struct RunRow {
    long t = 0;
    double sqrt_mspbe = 0.0;
    double sqrt_mse = 0.0;
    double gamma_t = 0.0;
    double big_t = 0.0;
    double sigma_fro = 0.0;
};

struct RunRecord {
    std::string alg;
    std::uint64_t seed = 0;
    std::uint64_t model_seed = 0;
    std::vector<RunRow> rows;
    std::string status = "BUDGET";  // CONVERGED | BUDGET | DIVERGED
    double wallclock_s = 0.0;
    Vector final_z;
    double final_sqrt_mse = 0.0;
    double final_sqrt_mspbe = 0.0;
};

// ---------------------------------------------------------------------------
// Environment instance: model + feature pipeline + evaluation oracles
// ---------------------------------------------------------------------------

namespace detail {

/// exact_statistics with a pseudo-inverse Gram, for diagnostics on
/// rank-deficient feature sets (Baird, ring) where the projection is still
/// well defined.
inline OmegaTriple exact_statistics_pinv(const FiniteMrp& m, const Matrix& phi) {
    OmegaTriple w = OmegaTriple::zero(static_cast<int>(phi.cols()));
    const Matrix d_nu = m.nu.asDiagonal();
    w.w0 = phi.transpose() * d_nu * m.expected_reward();
    w.w1 = phi.transpose() * d_nu * (m.gamma * m.P - Matrix::Identity(m.n, m.n)) * phi;
    const Matrix gram = phi.transpose() * d_nu * phi;
    w.w2 = gram.completeOrthogonalDecomposition().pseudoInverse();
    return w;
}

struct EnvInstance {
    // finite part
    std::optional<FiniteMrp> mrp;
    Matrix phi_matrix;  // n x k
    Vector v_exact;
    // continuous part
    std::optional<LinearGaussSystem> sys;
    FeatureMap map = FeatureMap::tabular(1);
    std::optional<ContOracle> cont_oracle;
    // shared
    int k = 0;
    OmegaTriple omega_star;  // exact (finite) or held-out estimate (continuous)

    bool finite() const { return mrp.has_value(); }

    double sqrt_mspbe(const Vector& z) const {
        const Vector v = omega_star.w0 + omega_star.w1 * z;
        return std::sqrt(std::max(0.0, v.dot(omega_star.w2 * v)));
    }

    double sqrt_mse(const Vector& z) const {
        if (finite())
            return std::sqrt(weighted_sq_norm(v_exact - phi_matrix * z, mrp->nu));
        return std::sqrt(cont_oracle->mse(z));
    }
};

inline EnvInstance make_instance(const ExperimentConfig& cfg,
                                 std::uint64_t model_seed) {
    EnvInstance inst;
    if (cfg.env == "baird-perfect" || cfg.env == "baird-imperfect") {
        auto [m, phi] = make_baird(cfg.env == "baird-perfect", cfg.gamma);
        inst.mrp = std::move(m);
        inst.phi_matrix = phi;
    } else if (cfg.env == "ring") {
        auto [m, phi] = make_ring(cfg.gamma);
        inst.mrp = std::move(m);
        inst.phi_matrix = phi;
    } else if (cfg.env == "random-rbf" || cfg.env == "random-fourier") {
        FiniteMrp m = make_random_mdp({cfg.n, model_seed}, cfg.gamma);
        FeatureMap map = (cfg.env == "random-rbf")
                             ? FeatureMap::rbf_grid(cfg.n, cfg.k)
                             : FeatureMap::fourier(cfg.k, 1.0 / (cfg.n - 1));
        inst.phi_matrix = build_matrix(map, cfg.n);
        inst.mrp = std::move(m);
    } else if (cfg.env == "cartpole" || cfg.env == "pendulum5") {
        LinearGaussSystem sys =
            (cfg.env == "cartpole") ? make_cartpole() : make_pendulum5();
        sys.policy_gain = solve_lqr_policy(sys, cfg.gamma).gain;
        FeatureMap raw = FeatureMap::quadratic(sys.state_dim());
        // held-out oracle trajectory: fixed seed, independent of run seeds
        ContOracle orc = build_cont_oracle(sys, raw, cfg.gamma, cfg.oracle_samples,
                                           0x9e3779b9u ^ model_seed, cfg.standardize);
        if (cfg.standardize) raw.set_scales(orc.scales);
        inst.sys = std::move(sys);
        inst.map = std::move(raw);
        inst.omega_star = orc.omega;
        inst.k = inst.map.k();
        inst.cont_oracle = std::move(orc);
        return inst;
    }
    inst.k = static_cast<int>(inst.phi_matrix.cols());
    inst.v_exact = exact_value_function(*inst.mrp);
    inst.omega_star = exact_statistics_pinv(*inst.mrp, inst.phi_matrix);
    return inst;
}

/// Uniform transition feed over finite and continuous sources, with the
/// double-sampling hook RG needs.
class TransitionFeed {
public:
    TransitionFeed(const EnvInstance& inst, const ExperimentConfig& cfg,
                   std::uint64_t seed)
        : inst_(&inst) {
        if (inst.finite())
            fin_.emplace(*inst.mrp, seed, cfg.mode);
        else
            cont_.emplace(*inst.sys, seed);
    }

    FeatTransition next() {
        FeatTransition tr;
        if (fin_) {
            const Transition t = fin_->next();
            last_state_ = t.s;
            tr.phi = inst_->phi_matrix.row(t.s).transpose();
            tr.reward = t.r;
            tr.phi_next = inst_->phi_matrix.row(t.s_next).transpose();
        } else {
            const ContTransition t = cont_->next();
            last_cont_state_ = t.s;
            tr.phi = inst_->map.evaluate(t.s);
            tr.reward = t.r;
            tr.phi_next = inst_->map.evaluate(t.s_next);
        }
        return tr;
    }

    /// Independent second next-state features for the last emitted state.
    Vector second_next_phi() {
        if (fin_) {
            const int sp2 = fin_->sample_next_state(last_state_);
            return inst_->phi_matrix.row(sp2).transpose();
        }
        return inst_->map.evaluate(cont_->sample_next_state(last_cont_state_));
    }

private:
    const EnvInstance* inst_;
    std::optional<TrajectorySampler> fin_;
    std::optional<LinearGaussSampler> cont_;
    int last_state_ = 0;
    Vector last_cont_state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

inline RunRecord run_one(const EnvInstance& inst, const ExperimentConfig& cfg,
                         const std::string& alg, std::uint64_t seed,
                         std::uint64_t model_seed) {
    const auto t_start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.alg = alg;
    rec.seed = seed;
    rec.model_seed = model_seed;

    const int k = inst.k;
    TransitionFeed feed(inst, cfg, mix_seed(seed, alg + "/traj"));
    Rng model_rng(mix_seed(seed, alg + "/model"));

    const Vector z0 = Vector::Constant(k, cfg.z0);
    std::optional<SceStepper> sce;
    std::optional<Td0> td0;
    std::optional<Gtd2> gtd2;
    std::optional<ResidualGradient> rg;
    std::optional<Lstd> lstd;
    std::optional<Rlstd> rlstd;
    std::optional<Lspe> lspe;

    if (alg == "sce") {
        GaussParam theta0 = GaussParam::isotropic(Vector::Constant(k, cfg.mu0), cfg.q);
        sce.emplace(k, cfg.schedule(), theta0, cfg.gamma);
    } else if (alg == "td0") {
        td0.emplace(z0);
    } else if (alg == "gtd2") {
        gtd2.emplace(z0);
    } else if (alg == "rg") {
        rg.emplace(z0);
    } else if (alg == "lstd") {
        lstd.emplace(k);
    } else if (alg == "rlstd") {
        rlstd.emplace(k);
    } else if (alg == "lspe") {
        lspe.emplace(z0);
    }

    auto current_z = [&]() -> Vector {
        if (sce) return sce->theta().mu;
        if (td0) return td0->z();
        if (gtd2) return gtd2->z();
        if (rg) return rg->z();
        if (lstd) return lstd->count() ? lstd->solve(cfg.lstd_ridge > 0.0
                                                         ? cfg.lstd_ridge
                                                         : 0.0)
                                       : Vector::Zero(k);
        if (rlstd) return rlstd->z();
        return lspe->z();
    };
    auto diverged = [&]() {
        return (td0 && td0->diverged()) || (gtd2 && gtd2->diverged()) ||
               (rg && rg->diverged());
    };

    rec.rows.reserve(static_cast<std::size_t>((cfg.budget + cfg.stride - 1) / cfg.stride));
    for (long t = 1; t <= cfg.budget; ++t) {
        const FeatTransition tr = feed.next();
        const double alpha = cfg.alpha(t);
        if (sce) {
            sce->step(tr, model_rng);
        } else if (td0) {
            td0->step(tr, alpha, cfg.gamma);
        } else if (gtd2) {
            const double eta = cfg.beta(t) / alpha;
            gtd2->step(tr, alpha, eta, cfg.gamma);
        } else if (rg) {
            rg->step(tr.phi, tr.reward, tr.phi_next, feed.second_next_phi(), alpha,
                     cfg.gamma);
        } else if (lstd) {
            lstd->step(tr, cfg.gamma);
        } else if (rlstd) {
            rlstd->step(tr, cfg.gamma);
        } else if (lspe) {
            lspe->step(tr, alpha, cfg.gamma);
        }

        if (t % cfg.stride == 0 || t == cfg.budget) {
            RunRow row;
            row.t = t;
            const Vector z = current_z();
            row.sqrt_mspbe = inst.sqrt_mspbe(z);
            row.sqrt_mse = inst.sqrt_mse(z);
            if (sce) {
                const SceDiagnostics d = sce->diagnostics();
                row.gamma_t = d.gamma;
                row.big_t = d.T;
                row.sigma_fro = d.sigma_fro;
            }
            rec.rows.push_back(row);
            if (diverged()) break;
        }
    }

    rec.final_z = current_z();
    rec.final_sqrt_mse = rec.rows.empty() ? 0.0 : rec.rows.back().sqrt_mse;
    rec.final_sqrt_mspbe = rec.rows.empty() ? 0.0 : rec.rows.back().sqrt_mspbe;
    rec.status = diverged() ? "DIVERGED" : "BUDGET";
    rec.wallclock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return rec;
}

inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string csv_name(const ExperimentConfig& cfg, const RunRecord& rec) {
    std::string base = cfg.name.empty() ? cfg.env : cfg.name;
    if (cfg.model_seeds.size() > 1)
        base += "-m" + std::to_string(rec.model_seed);
    return base + "-" + rec.alg + "-" + std::to_string(rec.seed) + ".csv";
}

inline void write_csv(const std::filesystem::path& path, const RunRecord& rec) {
    std::ofstream out(path, std::ios::binary);  // \n endings everywhere
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "t,sqrt_mspbe,sqrt_mse,gamma_t,T_t,sigma_fro\n";
    for (const RunRow& r : rec.rows)
        out << r.t << ',' << fmt9(r.sqrt_mspbe) << ',' << fmt9(r.sqrt_mse) << ','
            << fmt9(r.gamma_t) << ',' << fmt9(r.big_t) << ',' << fmt9(r.sigma_fro)
            << '\n';
    out << "# status," << rec.status << '\n';
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run / compare / plot-data
// ---------------------------------------------------------------------------

/// Executes every (model instance, algorithm, seed) job on a bounded worker
/// pool and writes one CSV per record. Output is a pure function of
/// (config, seeds): workers only fill pre-assigned slots.
inline std::vector<RunRecord> run(const ExperimentConfig& cfg, int jobs = 1) {
    cfg.validate();
    struct Job {
        std::uint64_t model_seed;
        std::string alg;
        std::uint64_t seed;
    };
    std::vector<Job> todo;
    for (std::uint64_t ms : cfg.model_seeds)
        for (const auto& alg : cfg.algs)
            for (std::uint64_t s : cfg.seeds) todo.push_back({ms, alg, s});

    // instances are immutable and shared across jobs
    std::map<std::uint64_t, detail::EnvInstance> instances;
    for (std::uint64_t ms : cfg.model_seeds)
        instances.emplace(ms, detail::make_instance(cfg, ms));

    std::vector<RunRecord> records(todo.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(todo.size());
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            const Job& j = todo[i];
            try {
                records[i] = detail::run_one(instances.at(j.model_seed), cfg, j.alg,
                                             j.seed, j.model_seed);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    jobs = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("run " + todo[i].alg + "/" +
                                     std::to_string(todo[i].seed) + ": " + errors[i]);

    std::filesystem::create_directories(cfg.out_dir);
    for (const RunRecord& rec : records)
        detail::write_csv(std::filesystem::path(cfg.out_dir) / detail::csv_name(cfg, rec),
                          rec);
    return records;
}

/// Final-sqrt(MSE) table: one row per model instance, one column per
/// algorithm, averaged over seeds.
inline std::string compare(const std::vector<RunRecord>& records) {
    if (records.empty()) return "(no records)\n";
    std::vector<std::string> algs;
    std::vector<std::uint64_t> models;
    for (const auto& r : records) {
        if (std::find(algs.begin(), algs.end(), r.alg) == algs.end())
            algs.push_back(r.alg);
        if (std::find(models.begin(), models.end(), r.model_seed) == models.end())
            models.push_back(r.model_seed);
    }
    std::ostringstream out;
    out << "instance";
    for (const auto& a : algs) out << ',' << a;
    out << '\n';
    for (std::uint64_t ms : models) {
        out << ms;
        for (const auto& a : algs) {
            double sum = 0.0;
            int cnt = 0;
            for (const auto& r : records)
                if (r.alg == a && r.model_seed == ms) {
                    sum += r.final_sqrt_mse;
                    ++cnt;
                }
            out << ',' << (cnt ? detail::fmt9(sum / cnt) : "nan");
        }
        out << '\n';
    }
    return out.str();
}

/// One plot-ready series file per (metric, algorithm): x = t/1000, y = mean
/// over seeds (and instances).
inline void emit_plot_data(const std::vector<RunRecord>& records,
                           const ExperimentConfig& cfg) {
    static const std::vector<std::pair<std::string, double RunRow::*>> metrics{
        {"sqrt_mspbe", &RunRow::sqrt_mspbe}, {"sqrt_mse", &RunRow::sqrt_mse},
        {"gamma", &RunRow::gamma_t},         {"T", &RunRow::big_t},
        {"sigma_fro", &RunRow::sigma_fro}};
    std::filesystem::create_directories(cfg.out_dir);
    const std::string base = cfg.name.empty() ? cfg.env : cfg.name;
    for (const auto& [mname, field] : metrics) {
        for (const auto& alg : cfg.algs) {
            std::vector<const RunRecord*> group;
            std::size_t nrows = 0;
            for (const auto& r : records)
                if (r.alg == alg) {
                    group.push_back(&r);
                    nrows = std::max(nrows, r.rows.size());
                }
            if (group.empty()) continue;
            std::ofstream out(std::filesystem::path(cfg.out_dir) /
                                  (base + "-" + mname + "-" + alg + ".series"),
                              std::ios::binary);
            out << "t_over_1000," << mname << "\n";
            for (std::size_t i = 0; i < nrows; ++i) {
                double sum = 0.0;
                int cnt = 0;
                long t = 0;
                for (const RunRecord* r : group)
                    if (i < r->rows.size()) {
                        sum += r->rows[i].*field;
                        t = r->rows[i].t;
                        ++cnt;
                    }
                out << detail::fmt9(t / 1000.0) << ',' << detail::fmt9(sum / cnt)
                    << '\n';
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Presets: the parameter tables of the benchmark experiments
// ---------------------------------------------------------------------------

inline std::vector<std::string> preset_names() {
    return {"baird-perfect-0.9", "baird-perfect-0.1", "baird-imperfect",
            "ring-0.99",         "ring-0.1",          "cartpole",
            "pendulum5",         "random-rbf",        "random-fourier",
            "table3-scaled"};
}

inline ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    if (name == "baird-perfect-0.9" || name == "baird-perfect-0.1") {
        c.env = "baird-perfect";
        c.gamma = (name == "baird-perfect-0.9") ? 0.9 : 0.1;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.01, 0.0};
        c.eps1 = 0.8;
        c.budget = 500000;
        c.algs = {"sce", "td0", "gtd2", "rg", "lstd", "rlstd", "lspe"};
        c.z0 = 1.0;
        c.q = 5.0;
        c.r = 0.01;
        c.warmup = 2000;
        c.lstd_ridge = 1e-6;
        if (c.gamma > 0.88) c.expected_diverge = {"td0"};
    } else if (name == "baird-imperfect") {
        c.env = "baird-imperfect";
        c.gamma = 0.99;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.01, 0.0};
        c.eps1 = 0.8;
        c.budget = 500000;
        c.algs = {"sce", "td0", "gtd2", "rg", "lstd", "rlstd", "lspe"};
        c.z0 = 1.0;
        c.q = 100.0;
        c.r = 0.001;
        c.warmup = 2000;
        c.lstd_ridge = 1e-6;
        c.expected_diverge = {"td0"};
    } else if (name == "ring-0.99" || name == "ring-0.1") {
        c.env = "ring";
        c.gamma = (name == "ring-0.99") ? 0.99 : 0.1;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.075, 0.0};
        c.eps1 = 0.85;
        c.budget = 500000;
        c.algs = {"sce", "td0", "gtd2", "rg", "lstd", "rlstd", "lspe"};
        c.q = 5.0;
        c.r = 1.0;
        c.warmup = 2000;
        c.lstd_ridge = 1e-6;
    } else if (name == "cartpole") {
        c.env = "cartpole";
        c.gamma = 0.95;
        c.alpha = {1.0, 1.0};   // t^{-1.0}
        c.beta = {1.0, 0.6};    // t^{-0.6}
        c.c_seq = {0.01, 0.0};
        c.eps1 = 0.95;
        c.budget = 5000000;
        c.stride = 1000;
        c.algs = {"sce"};
        c.q = 5.0;
        c.mu0 = 2.0;
        c.r = 1.0;
        c.warmup = 500;
        c.standardize = true;
    } else if (name == "pendulum5") {
        c.env = "pendulum5";
        c.gamma = 0.95;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.05, 0.0};
        c.eps1 = 0.95;
        c.budget = 1000000;
        c.stride = 500;
        c.algs = {"sce", "td0", "lstd"};
        c.q = 5.0;
        c.mu0 = 2.0;
        c.r = 1.0;
        c.warmup = 2000;
        c.standardize = true;
    } else if (name == "random-rbf" || name == "random-fourier") {
        c.env = name;
        c.gamma = (name == "random-rbf") ? 0.01 : 0.9;
        c.n = 1000;
        c.k = 50;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.075, 0.0};
        c.eps1 = 0.85;
        c.budget = 500000;
        c.stride = 500;
        c.algs = {"sce", "td0", "gtd2", "rg", "lstd", "rlstd", "lspe"};
        c.mode = SampleMode::StationaryChain;
        c.q = 5.0;
        c.r = 1.0;
        c.warmup = 2000;
        c.model_seeds = {1};
        c.seeds = {1, 2, 3, 4, 5};
    } else if (name == "table3-scaled") {
        c.env = "random-rbf";
        c.gamma = 0.9;
        c.n = 200;
        c.k = 20;
        c.alpha = {0.001, 0.0};
        c.beta = {0.05, 0.0};
        c.c_seq = {0.075, 0.0};
        c.eps1 = 0.85;
        c.budget = 2000000;
        c.stride = 2000;
        c.algs = {"sce", "lstd", "rlstd"};
        c.mode = SampleMode::StationaryChain;
        c.q = 5.0;
        c.r = 1.0;
        c.warmup = 2000;
        c.model_seeds = {1, 2, 3, 4, 5, 6, 7};
        c.seeds = {1};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Flat key=value config files (unknown keys are errors)
// ---------------------------------------------------------------------------

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    bool from_preset = false;
    std::istringstream in(text);
    std::string line;
    auto split_u64 = [](const std::string& s) {
        std::vector<std::uint64_t> out;
        std::istringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ';')) out.push_back(std::stoull(tok));
        return out;
    };
    auto split_str = [](const std::string& s) {
        std::vector<std::string> out;
        std::istringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ';')) out.push_back(tok);
        return out;
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "preset") {
            c = preset(val);
            from_preset = true;
        } else if (key == "name") c.name = val;
        else if (key == "env") c.env = val;
        else if (key == "gamma") c.gamma = std::stod(val);
        else if (key == "budget") c.budget = std::stol(val);
        else if (key == "stride") c.stride = std::stol(val);
        else if (key == "seeds") c.seeds = split_u64(val);
        else if (key == "algs") c.algs = split_str(val);
        else if (key == "alpha_scale") c.alpha.scale = std::stod(val);
        else if (key == "alpha_exp") c.alpha.exponent = std::stod(val);
        else if (key == "beta_scale") c.beta.scale = std::stod(val);
        else if (key == "beta_exp") c.beta.exponent = std::stod(val);
        else if (key == "c_scale") c.c_seq.scale = std::stod(val);
        else if (key == "c_exp") c.c_seq.exponent = std::stod(val);
        else if (key == "eps1") c.eps1 = std::stod(val);
        else if (key == "lambda") c.lambda = std::stod(val);
        else if (key == "rho") c.rho = std::stod(val);
        else if (key == "r") c.r = std::stod(val);
        else if (key == "q") c.q = std::stod(val);
        else if (key == "mu0") c.mu0 = std::stod(val);
        else if (key == "warmup") c.warmup = std::stol(val);
        else if (key == "n") c.n = std::stoi(val);
        else if (key == "k") c.k = std::stoi(val);
        else if (key == "model_seeds") c.model_seeds = split_u64(val);
        else if (key == "mode")
            c.mode = (val == "chain") ? SampleMode::StationaryChain
                                      : SampleMode::IidFromNu;
        else if (key == "standardize") c.standardize = (val == "1" || val == "true");
        else if (key == "lstd_ridge") c.lstd_ridge = std::stod(val);
        else if (key == "z0") c.z0 = std::stod(val);
        else if (key == "expected_diverge") {
            c.expected_diverge.clear();
            for (const auto& a : split_str(val)) c.expected_diverge.insert(a);
        } else if (key == "oracle_samples") c.oracle_samples = std::stol(val);
        else if (key == "out") c.out_dir = val;
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
    (void)from_preset;
    return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace scem

#include "dynfield/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dynfield/io.hpp"
#include "dynfield/rng.hpp"

namespace dynfield {

namespace {

constexpr Eigen::Index kChunk = 4096;

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

Eigen::Matrix3Xd uniform_domain_samples(const DomainBox& box, int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::Matrix3Xd pts(3, n);
    for (int i = 0; i < n; ++i) {
        pts(0, i) = rng.uniform(-box.half_extent, box.half_extent);
        pts(1, i) = rng.uniform(-box.half_extent, box.half_extent);
        pts(2, i) = rng.uniform(0.0, box.total_time);
    }
    return pts;
}

double resolve_rho0(const TrainConfig& cfg, double sigma_eff) {
    return cfg.rho0 < 0.0 ? 1e-4 / (sigma_eff * sigma_eff) : cfg.rho0;
}

}  // namespace

void TrainConfig::validate() const {
    check(outer_max_iter >= 1 && inner_epochs >= 1, "iteration counts must be positive");
    check(batch_frames >= 1, "batch size must be positive");
    check(lr_c0 > 0.0 && lr_eta0 > 0.0, "learning rates must be positive");
    check(lr_total_decay > 0.0 && lr_total_decay <= 1.0, "total decay must lie in (0, 1]");
    check(tau0 >= 0.0, "negative partition penalty weight");
    check(aux_decay_epochs >= 1, "need at least one decay epoch");
    check(q > 0.0 && q < 1.0, "exponent must lie in (0, 1)");
    check(eps_q > 0.0, "smoothing floor must be positive");
    check(tv_gamma >= 0.0, "negative regularization weight");
    check(tv_samples >= 1, "need at least one sample");
    check(init_outer_iter >= 1, "warm start needs at least one iteration");
    check(coeff_cache_mb >= 0, "negative cache budget");
    arch.validate();
}

void adam_step(AdamState& st, Eigen::VectorXd& params, const Eigen::VectorXd& grads) {
    if (params.size() != st.m.size() || grads.size() != st.m.size())
        throw std::invalid_argument("optimizer state does not match parameter size");
    if (!grads.allFinite())
        throw std::runtime_error("non-finite gradient at step " + io::format_int(st.step + 1));
    st.step += 1;
    st.m = st.beta1 * st.m + (1.0 - st.beta1) * grads;
    st.v = st.beta2 * st.v + (1.0 - st.beta2) * grads.cwiseProduct(grads);
    const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    params.array() -=
        st.lr * (st.m / c1).array() / ((st.v / c2).array().sqrt() + st.eps);
}

double aux_weight_at(double aux0, int decay_epochs, int epoch) {
    check(epoch >= 1 && decay_epochs >= 1, "schedule indices are 1-based");
    if (epoch > decay_epochs) return 0.0;
    if (decay_epochs == 1) return aux0;
    const double expo = static_cast<double>(epoch - 1) / static_cast<double>(decay_epochs - 1);
    return aux0 * std::pow(1e-3, expo);
}

Eigen::Index TrainingProblem::residual_count() const {
    Eigen::Index n = 0;
    for (const auto& b : batches) n += b.d.size();
    return n;
}

double TrainingProblem::full_fidelity(const PouNet& f) const {
    double total = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        LossSpec spec;
        spec.residual_terms.push_back(batches[b]);
        total += loss_value(f, spec) * batch_sizes[b] / frames_total;
    }
    return total;
}

TrainingProblem make_training_problem(const Sinogram& d, const ImagingSystem& sys,
                                      const TrainConfig& cfg, bool static_time) {
    d.validate();
    sys.validate();
    check(d.num_frames() == sys.num_frames && d.data.rows() == sys.measurements_per_frame(),
          "sinogram does not match the system");
    TrainingProblem prob;
    prob.frames_total = sys.num_frames;
    prob.sigma_eff = d.sigma > 0.0 ? d.sigma : 1.0;
    prob.volume = domain_of(sys).volume();
    const int arcs = sys.measurements_per_frame();
    const double t_mid = 0.5 * sys.total_time_T;

    const int batch_span = std::min(cfg.batch_frames, sys.num_frames);
    for (int k0 = 0; k0 < sys.num_frames; k0 += batch_span) {
        const int nb = std::min(batch_span, sys.num_frames - k0);
        std::vector<FrameQuadrature> quads;
        quads.reserve(static_cast<std::size_t>(nb));
        Eigen::Index npts = 0;
        for (int p = 0; p < nb; ++p) {
            quads.push_back(frame_quadrature(sys, k0 + p, cfg.quad_q));
            npts += quads.back().size();
        }
        GroupedResidualTerm term;
        term.pts.resize(3, npts);
        term.h.resize(npts);
        term.group.reserve(static_cast<std::size_t>(npts));
        term.d.resize(static_cast<Eigen::Index>(nb) * arcs);
        term.weight = static_cast<double>(sys.num_frames) / nb / (prob.sigma_eff * prob.sigma_eff);
        Eigen::Index at = 0;
        for (int p = 0; p < nb; ++p) {
            const auto& fq = quads[static_cast<std::size_t>(p)];
            term.pts.middleCols(at, fq.size()) = fq.points;
            if (static_time) term.pts.row(2).segment(at, fq.size()).setConstant(t_mid);
            term.h.segment(at, fq.size()) = fq.weights;
            for (Eigen::Index i = 0; i < fq.size(); ++i)
                term.group.push_back(p * arcs + fq.arc_of[static_cast<std::size_t>(i)]);
            term.d.segment(static_cast<Eigen::Index>(p) * arcs, arcs) = d.data.col(k0 + p);
            at += fq.size();
        }
        prob.batches.push_back(std::move(term));
        prob.batch_sizes.push_back(nb);
    }
    return prob;
}

TrainingProblem make_embedding_problem(const GridImage& reference, const TrainConfig& cfg) {
    reference.validate();
    TrainingProblem prob;
    const int frames = reference.frames();
    const int ns = reference.pixels_per_side;
    const Eigen::Index n = static_cast<Eigen::Index>(ns) * ns;
    prob.frames_total = frames;
    prob.sigma_eff = 1.0;
    const double extent = reference.pixel_pitch * ns;
    prob.volume = extent * extent * reference.times.back();

    const int batch_span = std::min(cfg.batch_frames, frames);
    for (int k0 = 0; k0 < frames; k0 += batch_span) {
        const int nb = std::min(batch_span, frames - k0);
        GroupedResidualTerm term;
        term.pts.resize(3, static_cast<Eigen::Index>(nb) * n);
        term.h = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(nb) * n);
        term.group.reserve(static_cast<std::size_t>(nb * n));
        term.d.resize(static_cast<Eigen::Index>(nb) * n);
        term.weight = static_cast<double>(frames) / nb;
        Eigen::Index at = 0;
        for (int p = 0; p < nb; ++p) {
            const double t = reference.times[static_cast<std::size_t>(k0 + p)];
            for (int iy = 0; iy < ns; ++iy)
                for (int ix = 0; ix < ns; ++ix) {
                    term.pts(0, at) = reference.pixel_center_x(ix);
                    term.pts(1, at) = reference.pixel_center_y(iy);
                    term.pts(2, at) = t;
                    term.group.push_back(static_cast<int>(at));
                    ++at;
                }
            term.d.segment(static_cast<Eigen::Index>(p) * n, n) = reference.values.col(k0 + p);
        }
        prob.batches.push_back(std::move(term));
        prob.batch_sizes.push_back(nb);
    }
    return prob;
}

double data_fidelity_batch(const PouNet& f, const Sinogram& d, const ImagingSystem& sys,
                           const std::vector<int>& batch_frames, int quad_q) {
    d.validate();
    check(!batch_frames.empty(), "empty frame batch");
    if (d.sigma <= 0.0)
        throw std::invalid_argument("fidelity weight needs a positive noise level");
    double acc = 0.0;
    for (const int k : batch_frames) {
        const Eigen::VectorXd model = crt_apply_field(f, sys, k, quad_q);
        acc += (model - d.data.col(k)).squaredNorm();
    }
    const double scale =
        static_cast<double>(sys.num_frames) / static_cast<double>(batch_frames.size());
    return 0.5 / (d.sigma * d.sigma) * scale * acc;
}

double stochastic_tv(const PouNet& f, int n_samples, std::uint64_t seed, bool include_time) {
    check(n_samples >= 1, "need at least one sample");
    LossSpec spec;
    TvSampleTerm term;
    term.pts = uniform_domain_samples(f.domain, n_samples, seed);
    term.gamma = 1.0;
    term.include_time = include_time;
    spec.tv_terms.push_back(std::move(term));
    return loss_value(f, spec);
}

double qnorm_penalty(const PouNet& f, int n_samples, double q, double eps_q, std::uint64_t seed) {
    check(n_samples >= 1, "need at least one sample");
    LossSpec spec;
    QnormTerm term;
    term.pts = uniform_domain_samples(f.domain, n_samples, seed);
    term.tau = 1.0;
    term.q = q;
    term.eps = eps_q;
    term.volume = f.domain.volume();
    spec.qnorm_terms.push_back(std::move(term));
    return loss_value(f, spec);
}

namespace {

/// Per-arc feature aggregates for the coefficient solve: column g of the
/// result is vec(sum_i h_i Psi(x_i) B(x_i)^T) over group g's points, so
/// the group residual is the dot product with vec(C).
Eigen::MatrixXd build_coeff_features(const PouNet& f, const GroupedResidualTerm& term) {
    const Eigen::Index pm = f.C.size();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(pm, term.d.size());
    const Eigen::Index n = term.pts.cols();
    BatchWork work;
    Eigen::Index at = 0;
    while (at < n) {
        Eigen::Index end = std::min(at + kChunk, n);
        while (end < n && term.group[end] == term.group[end - 1]) ++end;
        pounet_forward(f, normalize_batch(f.domain, term.pts.middleCols(at, end - at)), work, false);
        Eigen::Index i = at;
        while (i < end) {
            Eigen::Index j = i;
            while (j < end && term.group[j] == term.group[i]) ++j;
            const Eigen::MatrixXd g =
                work.Psi.middleCols(i - at, j - i) *
                term.h.segment(i, j - i).asDiagonal() *
                work.B.middleCols(i - at, j - i).transpose();
            G.col(term.group[i]) +=
                Eigen::Map<const Eigen::VectorXd>(g.data(), pm);
            i = j;
        }
        at = end;
    }
    return G;
}

}  // namespace

void update_C(PouNet& f, const TrainingProblem& prob, const TrainConfig& cfg,
              const SolveSchedule& sched, AdamState& adam) {
    check(!prob.batches.empty(), "problem has no batches");
    const Eigen::Index pm = f.C.size();
    const double bytes =
        static_cast<double>(pm) * static_cast<double>(prob.residual_count()) * 8.0;
    const bool cached = bytes <= static_cast<double>(cfg.coeff_cache_mb) * 1048576.0;

    std::vector<Eigen::MatrixXd> features;
    if (cached) {
        features.reserve(prob.batches.size());
        for (const auto& term : prob.batches) features.push_back(build_coeff_features(f, term));
    }

    std::uint64_t tv_counter = 0;
    for (int epoch = 1; epoch <= cfg.inner_epochs; ++epoch) {
        const double rho = aux_weight_at(sched.aux0, sched.aux_decay_epochs, epoch);
        adam.lr = sched.lr0 * std::pow(sched.lr_epoch_factor,
                                       static_cast<double>(sched.lr_epoch_offset + epoch - 1));
        for (std::size_t b = 0; b < prob.batches.size(); ++b) {
            Eigen::VectorXd cvec = Eigen::Map<const Eigen::VectorXd>(f.C.data(), pm);
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(pm);

            if (cached) {
                const Eigen::VectorXd res =
                    features[b].transpose() * cvec - prob.batches[b].d;
                grad += prob.batches[b].weight * (features[b] * res);
            } else {
                LossSpec spec;
                spec.residual_terms.push_back(prob.batches[b]);
                ParamGrads g = ParamGrads::zeros_like(f);
                loss_and_grads(f, spec, false, g);
                grad += Eigen::Map<const Eigen::VectorXd>(g.dC.data(), pm);
            }

            if (cfg.tv_gamma > 0.0) {
                LossSpec spec;
                TvSampleTerm tv;
                tv.pts = uniform_domain_samples(f.domain, cfg.tv_samples,
                                                hash_combine(sched.tv_seed, tv_counter++));
                tv.gamma = cfg.tv_gamma;
                tv.include_time = cfg.tv_include_time;
                spec.tv_terms.push_back(std::move(tv));
                ParamGrads g = ParamGrads::zeros_like(f);
                loss_and_grads(f, spec, false, g);
                grad += Eigen::Map<const Eigen::VectorXd>(g.dC.data(), pm);
            }
            if (rho > 0.0) grad += rho * cvec;

            adam_step(adam, cvec, grad);
            f.C = Eigen::Map<const Eigen::MatrixXd>(cvec.data(), f.C.rows(), f.C.cols());
        }
    }
}

void update_eta(PouNet& f, const TrainingProblem& prob, const TrainConfig& cfg,
                const SolveSchedule& sched, AdamState& adam) {
    check(!prob.batches.empty(), "problem has no batches");
    std::uint64_t tv_counter = 0;
    for (int epoch = 1; epoch <= cfg.inner_epochs; ++epoch) {
        const double tau = aux_weight_at(sched.aux0, sched.aux_decay_epochs, epoch);
        adam.lr = sched.lr0 * std::pow(sched.lr_epoch_factor,
                                       static_cast<double>(sched.lr_epoch_offset + epoch - 1));
        for (std::size_t b = 0; b < prob.batches.size(); ++b) {
            LossSpec spec;
            spec.residual_terms.push_back(prob.batches[b]);
            if (cfg.tv_gamma > 0.0) {
                TvSampleTerm tv;
                tv.pts = uniform_domain_samples(f.domain, cfg.tv_samples,
                                                hash_combine(sched.tv_seed, tv_counter++));
                tv.gamma = cfg.tv_gamma;
                tv.include_time = cfg.tv_include_time;
                spec.tv_terms.push_back(std::move(tv));
            }
            if (tau > 0.0) {
                QnormTerm qn;
                qn.pts = uniform_domain_samples(f.domain, cfg.tv_samples,
                                                hash_combine(sched.tv_seed, tv_counter++) ^
                                                    0x714e6f726dULL);
                qn.tau = tau;
                qn.q = cfg.q;
                qn.eps = cfg.eps_q;
                qn.volume = prob.volume;
                spec.qnorm_terms.push_back(std::move(qn));
            }
            ParamGrads g = ParamGrads::zeros_like(f);
            loss_and_grads(f, spec, true, g);
            Eigen::VectorXd params = eta_to_vector(f.net);
            adam_step(adam, params, eta_grads_to_vector(f, g));
            eta_from_vector(params, f.net);
        }
    }
}

void TrainReport::save_csv(const std::filesystem::path& path) const {
    io::CsvWriter w;
    w.comment("best_iter=" + io::format_int(best_iter));
    if (aborted) w.comment("aborted=" + abort_reason);
    w.header({"iter", "objective", "fidelity", "tv", "rho_term", "tau_term", "lr_c", "lr_eta"});
    for (const auto& r : rows) {
        w.field(r.iter)
            .field(r.j_full)
            .field(r.fidelity)
            .field(r.tv)
            .field(r.rho_term)
            .field(r.tau_term)
            .field(r.lr_c)
            .field(r.lr_eta);
        w.end_row();
    }
    w.save(path);
}

void TrainReport::save_timings(const std::filesystem::path& path) const {
    io::CsvWriter w;
    w.header({"iter", "wall_seconds"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        w.field(rows[i].iter).field(i < wall_seconds.size() ? wall_seconds[i] : 0.0);
        w.end_row();
    }
    w.save(path);
}

namespace {

struct JParts {
    double fidelity = 0.0;
    double tv = 0.0;
    double j = 0.0;
};

JParts evaluate_objective(const PouNet& f, const TrainingProblem& prob, const TrainConfig& cfg,
                          std::uint64_t stop_seed) {
    JParts out;
    out.fidelity = prob.full_fidelity(f);
    if (cfg.tv_gamma > 0.0)
        out.tv = stochastic_tv(f, cfg.tv_samples, stop_seed, cfg.tv_include_time);
    out.j = out.fidelity + cfg.tv_gamma * out.tv;
    return out;
}

TrainRow make_row(int iter, const JParts& parts, const PouNet& f, const TrainConfig& cfg,
                  double rho0, std::uint64_t stop_seed, double lr_c, double lr_eta) {
    TrainRow r;
    r.iter = iter;
    r.j_full = parts.j;
    r.fidelity = parts.fidelity;
    r.tv = parts.tv;
    r.rho_term = 0.5 * rho0 * f.C.squaredNorm();
    r.tau_term =
        cfg.tau0 > 0.0
            ? cfg.tau0 * qnorm_penalty(f, cfg.tv_samples, cfg.q, cfg.eps_q, stop_seed ^ 1)
            : 0.0;
    r.lr_c = lr_c;
    r.lr_eta = lr_eta;
    return r;
}

std::string checkpoint_name(int iter) {
    std::string n = std::to_string(iter);
    while (n.size() < 3) n.insert(n.begin(), '0');
    return "iter_" + n + ".ckpt";
}

}  // namespace

PouNet run_training(const TrainingProblem& prob, const TrainConfig& cfg, const PouNet& start,
                    TrainReport& report, std::uint64_t phase_tag,
                    const std::filesystem::path& checkpoint_dir) {
    cfg.validate();
    const double rho0 = resolve_rho0(cfg, prob.sigma_eff);
    const std::uint64_t phase_seed = hash_combine(cfg.seed, phase_tag);
    const std::uint64_t stop_seed = hash_combine(phase_seed, 0x73746f70ULL);

    const int epochs_total = cfg.outer_max_iter * cfg.inner_epochs;
    const double lr_factor =
        epochs_total > 1 ? std::pow(cfg.lr_total_decay, 1.0 / (epochs_total - 1)) : 1.0;

    PouNet f = start;
    const auto t0 = std::chrono::steady_clock::now();
    const auto elapsed = [&t0] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    JParts parts = evaluate_objective(f, prob, cfg, stop_seed);
    report.rows.push_back(
        make_row(0, parts, f, cfg, rho0, stop_seed, cfg.lr_c0, cfg.lr_eta0));
    report.wall_seconds.push_back(elapsed());

    PouNet best = f;
    double best_j = parts.j;
    report.best_iter = 0;
    double prev_j = parts.j;

    for (int outer = 1; outer <= cfg.outer_max_iter; ++outer) {
        const int offset = (outer - 1) * cfg.inner_epochs;
        try {
            SolveSchedule sc;
            sc.aux0 = rho0;
            sc.aux_decay_epochs = cfg.aux_decay_epochs;
            sc.lr0 = cfg.lr_c0;
            sc.lr_epoch_factor = lr_factor;
            sc.lr_epoch_offset = offset;
            sc.tv_seed = hash_combine(phase_seed, 2ULL * outer);
            AdamState adam_c(f.C.size(), sc.lr0);
            update_C(f, prob, cfg, sc, adam_c);

            SolveSchedule se = sc;
            se.aux0 = cfg.tau0;
            se.lr0 = cfg.lr_eta0;
            se.tv_seed = hash_combine(phase_seed, 2ULL * outer + 1);
            AdamState adam_e(f.net.param_count(), se.lr0);
            update_eta(f, prob, cfg, se, adam_e);
        } catch (const std::runtime_error& e) {
            report.aborted = true;
            report.abort_reason = e.what();
            break;
        }

        parts = evaluate_objective(f, prob, cfg, stop_seed);
        if (!std::isfinite(parts.j)) {
            report.aborted = true;
            report.abort_reason = "non-finite objective at iteration " + io::format_int(outer);
            break;
        }
        const double lr_now = std::pow(lr_factor, offset + cfg.inner_epochs - 1);
        report.rows.push_back(make_row(outer, parts, f, cfg, rho0, stop_seed,
                                       cfg.lr_c0 * lr_now, cfg.lr_eta0 * lr_now));
        report.wall_seconds.push_back(elapsed());
        if (!checkpoint_dir.empty())
            save_pounet(f, checkpoint_dir / checkpoint_name(outer));

        if (parts.j < best_j) {
            best_j = parts.j;
            best = f;
            report.best_iter = outer;
        }
        if (parts.j >= prev_j) break;
        prev_j = parts.j;
    }
    return best;
}

PouNet init_static(const Sinogram& d, const ImagingSystem& sys, const PouNet& start,
                   const TrainConfig& cfg, TrainReport& report) {
    TrainConfig sc = cfg;
    sc.outer_max_iter = cfg.init_outer_iter;
    sc.tv_include_time = false;
    const TrainingProblem prob = make_training_problem(d, sys, sc, true);
    return run_training(prob, sc, start, report, 0x696e6974ULL);
}

TrainResult reconstruct_nf(const Sinogram& d, const ImagingSystem& sys, const TrainConfig& cfg,
                           const std::filesystem::path& checkpoint_dir) {
    cfg.validate();
    TrainResult out;
    const TrainingProblem prob = make_training_problem(d, sys, cfg, false);
    const PouNet fresh = init_siren(cfg.arch, PolyBasis::tensor_product(), domain_of(sys), cfg.seed);

    // The iter-0 row records the untrained field so reductions are measured
    // from the true start, not from the warm start.
    const std::uint64_t phase_seed = hash_combine(cfg.seed, 0x64796eULL);
    const std::uint64_t stop_seed = hash_combine(phase_seed, 0x73746f70ULL);
    const double rho0 = resolve_rho0(cfg, prob.sigma_eff);
    const JParts parts0 = evaluate_objective(fresh, prob, cfg, stop_seed);
    out.report.rows.push_back(
        make_row(0, parts0, fresh, cfg, rho0, stop_seed, cfg.lr_c0, cfg.lr_eta0));
    out.report.wall_seconds.push_back(0.0);

    TrainReport init_report;
    const PouNet warm = init_static(d, sys, fresh, cfg, init_report);

    TrainReport dyn;
    out.field = run_training(prob, cfg, warm, dyn, 0x64796eULL, checkpoint_dir);
    for (std::size_t i = 0; i < dyn.rows.size(); ++i) {
        dyn.rows[i].iter += 1;
        out.report.rows.push_back(dyn.rows[i]);
        out.report.wall_seconds.push_back(dyn.wall_seconds[i]);
    }
    out.report.best_iter = dyn.best_iter + 1;
    out.report.aborted = dyn.aborted;
    out.report.abort_reason = dyn.abort_reason;
    return out;
}

TrainResult reconstruct_embedding(const GridImage& reference, const DomainBox& domain,
                                  const TrainConfig& cfg) {
    cfg.validate();
    TrainResult out;
    const TrainingProblem prob = make_embedding_problem(reference, cfg);
    const PouNet fresh = init_siren(cfg.arch, PolyBasis::tensor_product(), domain, cfg.seed);
    out.field = run_training(prob, cfg, fresh, out.report, 0x656d62ULL);
    return out;
}

}  // namespace dynfield

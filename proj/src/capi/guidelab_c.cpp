// Copyright 2026 The guidelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "guidelab/guidelab.h"

#include <cstring>
#include <new>
#include <string>

#include "analysis.hpp"
#include "config.hpp"
#include "runner.hpp"

struct gl_config {
  guidelab::ExperimentConfig cfg;
};
struct gl_schedule {
  guidelab::NoiseSchedule sched;
};
struct gl_gmm {
  guidelab::ClassGmm gmm;
};
struct gl_mlp {
  guidelab::Mlp net;
};

namespace {

thread_local std::string g_last_error;

gl_status to_status(guidelab::ErrorCode code) {
  using guidelab::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return GL_ERR_INVALID_ARGUMENT;
    case ErrorCode::ShapeMismatch: return GL_ERR_SHAPE;
    case ErrorCode::Io: return GL_ERR_IO;
    case ErrorCode::Format: return GL_ERR_FORMAT;
    case ErrorCode::Version: return GL_ERR_VERSION;
    case ErrorCode::Truncated: return GL_ERR_TRUNCATED;
    case ErrorCode::Config: return GL_ERR_CONFIG;
    case ErrorCode::MissingHandle: return GL_ERR_MISSING_HANDLE;
    case ErrorCode::Precondition: return GL_ERR_PRECONDITION;
    case ErrorCode::Internal: return GL_ERR_INTERNAL;
  }
  return GL_ERR_INTERNAL;
}

template <typename F>
gl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GL_OK;
  } catch (const guidelab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return GL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GL_ERR_INTERNAL;
  }
}

template <typename... P>
void need(const char* what, const P*... ptrs) {
  if (((ptrs == nullptr) || ...))
    guidelab::fail(guidelab::ErrorCode::MissingHandle, std::string(what) + ": null argument");
}

guidelab::ClassifierKind kind_of(int kind) {
  if (kind == GL_CLASSIFIER_ROBUST) return guidelab::ClassifierKind::Robust;
  if (kind == GL_CLASSIFIER_NONROBUST) return guidelab::ClassifierKind::NonRobust;
  guidelab::fail(guidelab::ErrorCode::InvalidArgument, "unknown classifier kind");
}

void check_step(const guidelab::NoiseSchedule& s, int t, int lo) {
  if (t < lo || t > s.steps())
    guidelab::fail(guidelab::ErrorCode::InvalidArgument, "step out of range");
}

gl_cell_row row_of(const guidelab::CellResult& r) {
  gl_cell_row row{};
  row.cell = r.spec.index;
  row.robust = r.spec.robust;
  row.x0pred = r.spec.x0_pred;
  row.adam = r.spec.adam;
  row.fid = r.fid;
  row.accuracy = r.accuracy;
  row.seed = r.seed;
  row.mean_cosine = guidelab::mean_cosine(r.cosine, 0, r.cosine.points.size());
  return row;
}

}  // namespace

extern "C" {

const char* gl_version(void) { return "0.1.0"; }

const char* gl_status_name(gl_status s) {
  switch (s) {
    case GL_OK: return "ok";
    case GL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case GL_ERR_SHAPE: return "shape mismatch";
    case GL_ERR_IO: return "i/o error";
    case GL_ERR_FORMAT: return "bad format";
    case GL_ERR_VERSION: return "unsupported version";
    case GL_ERR_TRUNCATED: return "truncated data";
    case GL_ERR_CONFIG: return "config error";
    case GL_ERR_MISSING_HANDLE: return "missing handle";
    case GL_ERR_PRECONDITION: return "precondition failed";
    case GL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gl_last_error(void) { return g_last_error.c_str(); }

gl_status gl_config_default(gl_config** out) {
  return guarded([&] {
    need("gl_config_default", out);
    *out = new gl_config{guidelab::default_config()};
  });
}

gl_status gl_config_load(const char* path, gl_config** out) {
  return guarded([&] {
    need("gl_config_load", path, out);
    *out = new gl_config{guidelab::load_config(path)};
  });
}

gl_status gl_config_parse(const char* text, gl_config** out) {
  return guarded([&] {
    need("gl_config_parse", text, out);
    *out = new gl_config{guidelab::parse_config(text)};
  });
}

gl_status gl_config_set(gl_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need("gl_config_set", cfg, key, value);
    guidelab::ExperimentConfig next = cfg->cfg;
    guidelab::apply_setting(next, key, value);
    guidelab::validate(next);
    cfg->cfg = std::move(next);
  });
}

gl_status gl_config_to_text(const gl_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need("gl_config_to_text", cfg, needed);
    const std::string text = guidelab::config_to_text(cfg->cfg);
    *needed = text.size() + 1;
    if (buf && cap >= *needed) std::memcpy(buf, text.c_str(), *needed);
    else if (buf || cap)
      guidelab::fail(guidelab::ErrorCode::InvalidArgument, "gl_config_to_text: buffer too small");
  });
}

void gl_config_free(gl_config* cfg) { delete cfg; }

gl_status gl_gen_data(const gl_config* cfg) {
  return guarded([&] {
    need("gl_gen_data", cfg);
    guidelab::generate_data(cfg->cfg);
  });
}

gl_status gl_train_classifiers(const gl_config* cfg, double* clean_val, double* noisy_val) {
  return guarded([&] {
    need("gl_train_classifiers", cfg);
    const auto pair = guidelab::train_classifiers(cfg->cfg);
    if (clean_val) *clean_val = pair.clean.report.val_accuracy.back();
    if (noisy_val) *noisy_val = pair.noisy.report.val_accuracy.back();
  });
}

gl_status gl_train_denoiser(const gl_config* cfg, double* final_loss) {
  return guarded([&] {
    need("gl_train_denoiser", cfg);
    const auto out = guidelab::train_sprite_denoiser(cfg->cfg);
    if (final_loss) *final_loss = out.report.epoch_loss.back();
  });
}

gl_status gl_sample(const gl_config* cfg, gl_cell_row* row) {
  return guarded([&] {
    need("gl_sample", cfg);
    const auto r = guidelab::run_sample(cfg->cfg);
    if (row) *row = row_of(r);
  });
}

gl_status gl_run_grid(const gl_config* cfg, gl_cell_row* rows, size_t cap, size_t* count) {
  return guarded([&] {
    need("gl_run_grid", cfg);
    const auto results = guidelab::run_grid(cfg->cfg);
    if (count) *count = results.size();
    if (rows)
      for (size_t i = 0; i < results.size() && i < cap; ++i) rows[i] = row_of(results[i]);
  });
}

gl_status gl_run_sweep(const gl_config* cfg, const double* scales, size_t n,
                       gl_sweep_row* rows, size_t cap, size_t* count) {
  return guarded([&] {
    need("gl_run_sweep", cfg);
    if (n > 0) need("gl_run_sweep", scales);
    const std::vector<double> list =
        n > 0 ? std::vector<double>(scales, scales + n) : cfg->cfg.sweep_scales;
    const auto out = guidelab::run_scale_sweep(cfg->cfg, list);
    if (count) *count = out.size();
    if (rows)
      for (size_t i = 0; i < out.size() && i < cap; ++i)
        rows[i] = {out[i].scale, out[i].fid, out[i].accuracy, out[i].seed};
  });
}

gl_status gl_schedule_linear(int steps, double b0, double b1, int kind, gl_schedule** out) {
  return guarded([&] {
    need("gl_schedule_linear", out);
    if (kind != GL_VARIANCE_POSTERIOR && kind != GL_VARIANCE_BETA)
      guidelab::fail(guidelab::ErrorCode::InvalidArgument, "unknown variance kind");
    *out = new gl_schedule{guidelab::NoiseSchedule::linear(
        steps, b0, b1,
        kind == GL_VARIANCE_BETA ? guidelab::VarianceKind::Beta
                                 : guidelab::VarianceKind::Posterior)};
  });
}

gl_status gl_schedule_from_config(const gl_config* cfg, gl_schedule** out) {
  return guarded([&] {
    need("gl_schedule_from_config", cfg, out);
    *out = new gl_schedule{guidelab::make_schedule(cfg->cfg)};
  });
}

int gl_schedule_steps(const gl_schedule* s) { return s ? s->sched.steps() : 0; }

gl_status gl_schedule_alpha_bar(const gl_schedule* s, int t, double* out) {
  return guarded([&] {
    need("gl_schedule_alpha_bar", s, out);
    check_step(s->sched, t, 0);
    *out = s->sched.alpha_bar(t);
  });
}

gl_status gl_schedule_sigma2(const gl_schedule* s, int t, double* out) {
  return guarded([&] {
    need("gl_schedule_sigma2", s, out);
    check_step(s->sched, t, 1);
    *out = s->sched.sigma2(t);
  });
}

void gl_schedule_free(gl_schedule* s) { delete s; }

gl_status gl_gmm_from_config(const gl_config* cfg, gl_gmm** out) {
  return guarded([&] {
    need("gl_gmm_from_config", cfg, out);
    *out = new gl_gmm{guidelab::make_gmm(cfg->cfg)};
  });
}

int gl_gmm_dim(const gl_gmm* g) { return g ? g->gmm.dim() : 0; }
int gl_gmm_num_classes(const gl_gmm* g) { return g ? g->gmm.num_classes() : 0; }

gl_status gl_gmm_log_posterior(const gl_gmm* g, const gl_schedule* s, const double* x,
                               int t, int kind, double* out) {
  return guarded([&] {
    need("gl_gmm_log_posterior", g, s, x, out);
    check_step(s->sched, t, 0);
    const Eigen::Map<const guidelab::Vec> xv(x, g->gmm.dim());
    const guidelab::Vec lp = kind_of(kind) == guidelab::ClassifierKind::Robust
                                 ? guidelab::robust_log_posterior(g->gmm, xv, t, s->sched)
                                 : guidelab::nonrobust_log_posterior(g->gmm, xv);
    std::memcpy(out, lp.data(), sizeof(double) * static_cast<size_t>(lp.size()));
  });
}

gl_status gl_gmm_grad_log_posterior(const gl_gmm* g, const gl_schedule* s, const double* x,
                                    int t, int y, int kind, double* out) {
  return guarded([&] {
    need("gl_gmm_grad_log_posterior", g, s, x, out);
    check_step(s->sched, t, 0);
    if (y < 0 || y >= g->gmm.num_classes())
      guidelab::fail(guidelab::ErrorCode::InvalidArgument, "class out of range");
    const Eigen::Map<const guidelab::Vec> xv(x, g->gmm.dim());
    const guidelab::Vec gr = guidelab::grad_log_posterior(g->gmm, xv, t, y, kind_of(kind), s->sched);
    std::memcpy(out, gr.data(), sizeof(double) * static_cast<size_t>(gr.size()));
  });
}

gl_status gl_gmm_exact_eps(const gl_gmm* g, const gl_schedule* s, const double* x, int t,
                           double* out) {
  return guarded([&] {
    need("gl_gmm_exact_eps", g, s, x, out);
    check_step(s->sched, t, 1);
    const Eigen::Map<const guidelab::Vec> xv(x, g->gmm.dim());
    const guidelab::Vec e = guidelab::exact_eps(g->gmm, xv, t, s->sched);
    std::memcpy(out, e.data(), sizeof(double) * static_cast<size_t>(e.size()));
  });
}

gl_status gl_gmm_posterior_mean(const gl_gmm* g, const gl_schedule* s, const double* x,
                                int t, double* out) {
  return guarded([&] {
    need("gl_gmm_posterior_mean", g, s, x, out);
    check_step(s->sched, t, 1);
    const Eigen::Map<const guidelab::Vec> xv(x, g->gmm.dim());
    const guidelab::Vec m = guidelab::posterior_mean_x0(g->gmm, xv, t, s->sched);
    std::memcpy(out, m.data(), sizeof(double) * static_cast<size_t>(m.size()));
  });
}

void gl_gmm_free(gl_gmm* g) { delete g; }

gl_status gl_mlp_load(const char* path, gl_mlp** out) {
  return guarded([&] {
    need("gl_mlp_load", path, out);
    *out = new gl_mlp{guidelab::load_mlp(path)};
  });
}

int gl_mlp_input_dim(const gl_mlp* m) { return m ? m->net.input_dim() : 0; }
int gl_mlp_output_dim(const gl_mlp* m) { return m ? m->net.output_dim() : 0; }
int gl_mlp_time_conditioned(const gl_mlp* m) { return m && m->net.time_conditioning(); }

gl_status gl_mlp_forward(const gl_mlp* m, const double* x, size_t n, const double* tfeat,
                         double* out) {
  return guarded([&] {
    need("gl_mlp_forward", m);
    if (n > 0) need("gl_mlp_forward", x, out);
    const auto cols = static_cast<Eigen::Index>(n);
    const Eigen::Map<const guidelab::Mat> xm(x, m->net.input_dim(), cols);
    guidelab::Mat y;
    if (m->net.time_conditioning()) {
      need("gl_mlp_forward: time features", tfeat);
      const guidelab::Mat tf =
          Eigen::Map<const guidelab::Mat>(tfeat, guidelab::kTimeFeatures, cols);
      y = guidelab::forward(m->net, xm, &tf);
    } else {
      if (tfeat)
        guidelab::fail(guidelab::ErrorCode::InvalidArgument, "net takes no time features");
      y = guidelab::forward(m->net, xm);
    }
    if (n > 0) std::memcpy(out, y.data(), sizeof(double) * static_cast<size_t>(y.size()));
  });
}

void gl_mlp_free(gl_mlp* m) { delete m; }

gl_status gl_frechet_distance(const double* a, size_t na, const double* b, size_t nb,
                              int dim, double* out) {
  return guarded([&] {
    need("gl_frechet_distance", out);
    if (dim < 1) guidelab::fail(guidelab::ErrorCode::InvalidArgument, "dim must be >= 1");
    if (na > 0) need("gl_frechet_distance", a);
    if (nb > 0) need("gl_frechet_distance", b);
    const Eigen::Map<const guidelab::Mat> am(a, dim, static_cast<Eigen::Index>(na));
    const Eigen::Map<const guidelab::Mat> bm(b, dim, static_cast<Eigen::Index>(nb));
    *out = guidelab::frechet_distance(am, bm);
  });
}

}  // extern "C"

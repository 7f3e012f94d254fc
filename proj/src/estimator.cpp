#include "stdgr/estimator.hpp"

namespace stdgr {

PipelineResult fit_pipeline(const DesignPair& d, const PipelineConfig& cfg,
                            const IterationCallback& on_iteration) {
  cfg.stdgr.validate();
  PipelineResult out;
  out.nnm = nnm_estimate(d, cfg.nnm);
  out.c_bar = cfg.c_bar.value_or(default_ridge_constant(d.m(), d.p, d.samples()));
  if (cfg.stdgr.ranks) {
    out.ranks = *cfg.stdgr.ranks;
  } else {
    out.ranks = select_ranks(out.nnm.w, out.c_bar);
    out.ranks_selected = true;
  }
  out.init = hosvd(out.nnm.w, out.ranks);
  out.laplacians = build_laplacians(out.init, cfg.epsilon);
  out.fit = solve(d, out.laplacians, cfg.stdgr, out.init, on_iteration);
  return out;
}

}  // namespace stdgr

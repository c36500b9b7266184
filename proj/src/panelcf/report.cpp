#include "panelcf/report.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#ifndef PANELCF_VERSION
#define PANELCF_VERSION "dev"
#endif

namespace panelcf {

using ojson = nlohmann::ordered_json;

namespace {

ojson interval_json(const std::optional<Interval>& ci) {
  if (!ci) return nullptr;
  return ojson{{"lo", ci->lo}, {"hi", ci->hi}};
}

bool wants(IntervalSelect sel, IntervalSelect which) { return sel == IntervalSelect::All || sel == which; }

ojson report_object(const IntervalReport& r, IntervalSelect sel) {
  ojson j;
  j["point"] = r.point;
  j["point_hz"] = r.point_hz;
  j["point_vt"] = r.point_vt;
  j["v_hz"] = r.v_hz;
  j["v_vt"] = r.v_vt;
  j["v_mix"] = r.v_mix;
  j["v_mix_raw"] = r.v_mix_raw;
  j["mix_fallback_used"] = r.mix_fallback_used;
  j["trace_term"] = r.trace_term;
  j["bounds"] = {{"v_mix_min", r.bounds.v_mix_min}, {"v_mix_max", r.bounds.v_mix_max}};
  j["level"] = r.theta;
  j["z"] = r.z;
  j["ci_hz"] = wants(sel, IntervalSelect::Hz) ? interval_json(r.ci_hz) : ojson(nullptr);
  j["ci_vt"] = wants(sel, IntervalSelect::Vt) ? interval_json(r.ci_vt) : ojson(nullptr);
  j["ci_mix"] = wants(sel, IntervalSelect::Mixed) ? interval_json(r.ci_mix) : ojson(nullptr);
  j["degeneracy"] = {{"hz_degenerate", r.hz_degenerate}, {"vt_degenerate", r.vt_degenerate}};
  j["negative_variance"] = {{"hz", r.hz_negative_variance}, {"vt", r.vt_negative_variance}};
  j["cov"] = to_string(r.cov_kind);
  j["method"] = describe(r.method);
  j["rank_used"] = r.rank_used;
  j["period_index"] = r.period;
  j["max_leverage"] = {{"u", r.max_leverage_u}, {"v", r.max_leverage_v}};
  return j;
}

const char* kSlot[3] = {"hz", "vt", "mix"};

std::string method_column(const Method& m) { return method_name(m); }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return {};
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return {};
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_string(IntervalSelect s) {
  switch (s) {
    case IntervalSelect::Hz: return "hz";
    case IntervalSelect::Vt: return "vt";
    case IntervalSelect::Mixed: return "mixed";
    case IntervalSelect::All: return "all";
  }
  return "all";
}

AnalysisRun run_analysis(const PanelData& panel, const AnalysisConfig& config) {
  AnalysisRun run;
  run.config = config;
  run.version = PANELCF_VERSION;
  run.input_digest = panel.source_digest;
  run.n = panel.n();
  run.t = panel.t();
  run.unit_labels = panel.unit_labels;
  for (Index p = panel.t0; p < panel.t(); ++p) {
    const Blocks b = split_blocks(panel, p);
    PeriodRecord rec;
    rec.period = p;
    rec.period_label = panel.time_labels[p];
    if (supports_inference(config.method)) {
      rec.report = analyze_period(b, config.method, config.cov, config.theta, config.solver, config.rtol);
      rec.point_hz = rec.report->point_hz;
      rec.point_vt = rec.report->point_vt;
    } else if (is_symmetric(config.method)) {
      const FitResult f = fit(b, svd_decompose(b.y0, config.rtol), config.method, config.solver);
      rec.point_hz = *f.point_hz;
      rec.point_vt = *f.point_vt;
    } else {
      const SpectralCache none;
      rec.point_hz = *fit(b, none, with_direction(config.method, Direction::Hz), config.solver).point_hz;
      rec.point_vt = *fit(b, none, with_direction(config.method, Direction::Vt), config.solver).point_vt;
    }
    run.records.push_back(std::move(rec));
  }
  return run;
}

std::string analysis_json(const AnalysisRun& run) {
  const AnalysisConfig& c = run.config;
  ojson j;
  j["schema_version"] = kAnalysisSchema;
  ojson cfg;
  cfg["dataset"] = c.dataset.empty() ? ojson(nullptr) : ojson(c.dataset);
  cfg["data_path"] = c.data_path;
  cfg["unit_col"] = c.schema.unit_col;
  cfg["time_col"] = c.schema.time_col;
  cfg["value_col"] = c.schema.value_col;
  cfg["treated"] = c.treated;
  cfg["t0"] = c.t0;
  cfg["method"] = method_name(c.method);
  cfg["method_detail"] = describe(c.method);
  if (const auto* p = std::get_if<Pcr>(&c.method)) {
    cfg["k"] = p->k;
    cfg["k_rule"] = c.k_rule;
    if (c.k_rule == "energy") cfg["energy_threshold"] = c.energy_threshold;
  }
  std::visit([&](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    if constexpr (std::is_same_v<M, Ridge>) cfg["lambda2"] = m.lambda2;
    if constexpr (std::is_same_v<M, Lasso>) cfg["lambda1"] = m.lambda1;
    if constexpr (std::is_same_v<M, ElasticNet>) {
      cfg["lambda1"] = m.lambda1;
      cfg["lambda2"] = m.lambda2;
    }
    if constexpr (std::is_same_v<M, Simplex>) cfg["lambda"] = m.lambda;
  }, c.method);
  cfg["cov"] = to_string(c.cov);
  cfg["alpha"] = c.theta;
  cfg["interval"] = to_string(c.interval);
  cfg["rtol"] = c.rtol;
  cfg["solver"] = {{"max_iters", c.solver.max_iters}, {"tol", c.solver.tol}};
  cfg["inference"] = supports_inference(c.method);
  j["config"] = cfg;
  j["panel"] = {{"N", run.n}, {"T", run.t}, {"treated", c.treated}, {"t0", c.t0}};
  j["provenance"] = {{"version", run.version}, {"input_sha256", run.input_digest}};
  ojson recs = ojson::array();
  for (const auto& r : run.records) {
    ojson o;
    o["period"] = r.period_label;
    o["period_index"] = r.period;
    o["point_hz"] = r.point_hz;
    o["point_vt"] = r.point_vt;
    if (r.report) {
      const ojson rep = report_object(*r.report, c.interval);
      o["ci_hz"] = rep["ci_hz"];
      o["ci_vt"] = rep["ci_vt"];
      o["ci_mix"] = rep["ci_mix"];
      o["flags"] = {{"hz_degenerate", r.report->hz_degenerate},
                    {"vt_degenerate", r.report->vt_degenerate},
                    {"mix_fallback_used", r.report->mix_fallback_used},
                    {"hz_negative_variance", r.report->hz_negative_variance},
                    {"vt_negative_variance", r.report->vt_negative_variance}};
      o["report"] = rep;
    } else {
      o["ci_hz"] = nullptr;
      o["ci_vt"] = nullptr;
      o["ci_mix"] = nullptr;
      o["flags"] = {{"inference_unsupported", true}};
    }
    recs.push_back(std::move(o));
  }
  j["records"] = std::move(recs);
  return j.dump(2) + "\n";
}

std::string analysis_csv(const AnalysisRun& run) {
  std::ostringstream os;
  os << "period,point_hz,point_vt,ci_hz_lo,ci_hz_hi,ci_vt_lo,ci_vt_hi,ci_mix_lo,ci_mix_hi,"
        "v_hz,v_vt,v_mix,mix_fallback_used,hz_degenerate,vt_degenerate\n";
  const IntervalSelect sel = run.config.interval;
  for (const auto& r : run.records) {
    os << csv_field(r.period_label) << ',' << format_double(r.point_hz) << ',' << format_double(r.point_vt);
    auto put = [&](const std::optional<Interval>& ci, bool on) {
      if (ci && on) {
        os << ',' << format_double(ci->lo) << ',' << format_double(ci->hi);
      } else {
        os << ",,";
      }
    };
    if (r.report) {
      const auto& rep = *r.report;
      put(rep.ci_hz, wants(sel, IntervalSelect::Hz));
      put(rep.ci_vt, wants(sel, IntervalSelect::Vt));
      put(rep.ci_mix, wants(sel, IntervalSelect::Mixed));
      os << ',' << format_double(rep.v_hz) << ',' << format_double(rep.v_vt) << ',' << format_double(rep.v_mix)
         << ',' << (rep.mix_fallback_used ? "true" : "false") << ',' << (rep.hz_degenerate ? "true" : "false")
         << ',' << (rep.vt_degenerate ? "true" : "false");
    } else {
      os << ",,,,,,,,,,,";
    }
    os << '\n';
  }
  return os.str();
}

std::string interval_report_json(const IntervalReport& r, IntervalSelect select) {
  return report_object(r, select).dump(2) + "\n";
}

std::vector<CompareRow> compare_estimators(const PanelData& panel, const CompareConfig& cfg) {
  const Blocks first = split_blocks(panel, panel.t0);
  const SpectralCache cache = svd_decompose(first.y0, cfg.rtol);
  const Index k = cfg.k > 0 ? cfg.k : energy_rank(cache, cfg.energy_threshold);
  const std::vector<Method> methods = {OlsMinNorm{},
                                       Pcr{k},
                                       Ridge{cfg.lambda2},
                                       Lasso{cfg.lambda1, Direction::Hz},
                                       ElasticNet{cfg.lambda1, cfg.lambda2, Direction::Hz},
                                       Simplex{cfg.simplex_lambda, Direction::Hz}};
  std::vector<CompareRow> rows;
  for (Index p = panel.t0; p < panel.t(); ++p) {
    const Blocks b = split_blocks(panel, p);
    for (const auto& m : methods) {
      double hz = 0.0;
      double vt = 0.0;
      if (is_symmetric(m)) {
        const FitResult f = fit(b, cache, m, cfg.solver);
        hz = *f.point_hz;
        vt = *f.point_vt;
      } else {
        hz = *fit(b, cache, with_direction(m, Direction::Hz), cfg.solver).point_hz;
        vt = *fit(b, cache, with_direction(m, Direction::Vt), cfg.solver).point_vt;
      }
      rows.push_back({panel.time_labels[p], method_column(m), Direction::Hz, hz});
      rows.push_back({panel.time_labels[p], method_column(m), Direction::Vt, vt});
    }
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "period,method,direction,point\n";
  for (const auto& r : rows) {
    os << csv_field(r.period_label) << ',' << r.method << ',' << (r.direction == Direction::Hz ? "hz" : "vt")
       << ',' << format_double(r.point) << '\n';
  }
  return os.str();
}

std::string coverage_json(const CoverageTable& t, const std::string& study) {
  ojson j;
  j["schema_version"] = kCoverageSchema;
  j["study"] = study;
  j["reps"] = t.reps;
  j["seed"] = t.seed;
  j["cov"] = to_string(t.cov);
  j["level"] = t.theta;
  j["r"] = t.r;
  j["energy_threshold"] = t.energy_threshold;
  j["sigma2_t"] = t.sigma2_t;
  j["sigma2_n"] = t.sigma2_n;
  j["mix_fallback_count"] = t.fallback_count;
  ojson cp, al, unusable;
  for (int k = 0; k < 3; ++k) {
    ojson rc, ra;
    for (int e = 0; e < 3; ++e) {
      rc[std::string("mu_") + kSlot[e]] = t.cp[k][e];
      ra[std::string("mu_") + kSlot[e]] = t.al[k][e];
    }
    cp[kSlot[k]] = rc;
    al[kSlot[k]] = ra;
    unusable[kSlot[k]] = t.unusable[k];
  }
  j["cp"] = cp;
  j["al"] = al;
  j["unusable"] = unusable;
  j["jackknife_bias"] = {{"hz", t.mean_jack_bias_hz}, {"vt", t.mean_jack_bias_vt}};
  j["version"] = PANELCF_VERSION;
  return j.dump(2) + "\n";
}

std::string coverage_csv(const std::vector<std::pair<std::string, CoverageTable>>& studies) {
  std::ostringstream os;
  os << "study,metric";
  for (int k = 0; k < 3; ++k) {
    for (int e = 0; e < 3; ++e) os << ',' << kSlot[k] << "_on_mu_" << kSlot[e];
  }
  os << '\n';
  for (const auto& [name, t] : studies) {
    os << csv_field(name) << ",CP";
    for (int k = 0; k < 3; ++k) {
      for (int e = 0; e < 3; ++e) os << ',' << format_double(t.cp[k][e]);
    }
    os << '\n' << csv_field(name) << ",AL";
    for (int k = 0; k < 3; ++k) {
      for (int e = 0; e < 3; ++e) os << ',' << format_double(t.al[k][e]);
    }
    os << '\n';
  }
  return os.str();
}

DesignSummary design_summary(const PlaceboGrid& grid, Index treated_unit, Index treated_period) {
  DesignSummary s;
  s.treated_unit = treated_unit;
  s.treated_period = treated_period;
  s.time = design_estimand(grid, DesignSource::Time, treated_unit, treated_period);
  s.unit = design_estimand(grid, DesignSource::Unit, treated_unit, treated_period);
  s.both = design_estimand(grid, DesignSource::Both, treated_unit, treated_period);
  return s;
}

std::string design_json(const DesignSummary& s, const PlaceboGrid& grid, const std::string& input_digest) {
  ojson j;
  j["schema_version"] = kDesignSchema;
  j["method"] = describe(grid.method);
  j["treated_unit"] = grid.unit_labels[s.treated_unit];
  j["treated_period"] = grid.time_labels[s.treated_period];
  auto est = [](const DesignEstimate& e) { return ojson{{"value", e.value}, {"cells", e.cells}}; };
  j["estimands"] = {{"time", est(s.time)}, {"unit", est(s.unit)}, {"both", est(s.both)}};
  j["grid"] = {{"N", grid.fitted.rows()}, {"T", grid.fitted.cols()}, {"masked_first_period", true}};
  j["provenance"] = {{"version", PANELCF_VERSION}, {"input_sha256", input_digest}};
  return j.dump(2) + "\n";
}

}  // namespace panelcf

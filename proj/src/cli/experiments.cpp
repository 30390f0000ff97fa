#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "anderson/error.hpp"
#include "anderson/experiments.hpp"
#include "anderson/field_io.hpp"
#include "anderson/format.hpp"
#include "anderson/harmonic.hpp"
#include "anderson/ids.hpp"
#include "anderson/parallel.hpp"
#include "experiment.hpp"

namespace anderson::cli {

using nlohmann::ordered_json;

namespace {

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double v) const { return v >= lo && v <= hi; }
  std::string describe() const { return "[" + fmt(lo) + ", " + fmt(hi) + "]"; }
};

std::optional<Range> read_range(Section& e, const std::string& key, ordered_json& canon) {
  if (!e.has(key)) return std::nullopt;
  const std::vector<double> v = e.numbers(key);
  if (v.size() != 2 || !(v[0] <= v[1])) throw SchemaError("expect." + key + " must be [lo, hi] with lo <= hi");
  canon[key] = v;
  return Range{v[0], v[1]};
}

/// Reads the optional "expect" block through `fn`, which may consume keys of it.
template <class Fn>
void read_expect(Section& s, ordered_json& canon, Fn&& fn) {
  if (!s.has("expect")) return;
  Section e(s.raw("expect"));
  ordered_json out = ordered_json::object();
  fn(e, out);
  e.finish();
  canon["expect"] = out;
}

std::vector<double> read_lambda(Section& s, ordered_json& canon, double lo, double hi, int points) {
  if (s.has("lambda")) {
    Section l(s.raw("lambda"));
    lo = l.number("min", lo);
    hi = l.number("max", hi);
    points = l.integer("points", points);
    l.finish();
  }
  if (!(lo < hi) || points < 2) throw SchemaError("lambda needs min < max and at least 2 points");
  canon["lambda"] = {{"min", lo}, {"max", hi}, {"points", points}};
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

int read_dim(Section& s, ordered_json& canon) {
  const int dim = s.integer("dim", 2);
  if (dim != 2 && dim != 3) throw SchemaError("'dim' must be 2 or 3");
  canon["dim"] = dim;
  return dim;
}

double positive(Section& s, const std::string& key, std::optional<double> def, ordered_json& canon) {
  const double v = s.number(key, def);
  if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError("'" + key + "' must be positive");
  canon[key] = v;
  return v;
}

std::string one_of(Section& s, const std::string& key, const std::string& def, const std::vector<std::string>& allowed,
                   ordered_json& canon) {
  const std::string v = s.string(key, def);
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
    throw SchemaError("'" + key + "' has unsupported value '" + v + "'");
  canon[key] = v;
  return v;
}

Boundary read_bc(Section& s, ordered_json& canon) {
  return boundary_from_string(one_of(s, "bc", "dirichlet", {"dirichlet", "neumann"}, canon));
}

/// Torus of side 2L with 2n points and the box of side L (n cells) centered in it.
struct Geometry {
  Grid grid;
  Box box;
};

Geometry centered_geometry(int dim, double L, int n) {
  Grid g(dim, 2.0 * L, 2 * n);
  Box box = Box::centered(g, L);
  validate_box(g, box);
  return {g, box};
}

/// Mollified white noise, or the zero field.
Field potential(const Context& ctx, const Grid& g, std::uint64_t seed, double epsilon, bool zero) {
  if (zero) return Field(g);
  return mollify(cached_noise("white", g, seed, 0.0, ctx.cfg.cache), Mollifier{epsilon});
}

double subtracted(const Grid& g, double epsilon, bool zero, bool renormalize) {
  if (zero || !renormalize) return 0.0;
  return renorm_constant({g.dim(), epsilon}, g).value;
}

ordered_json fit_json(const stats::LinearFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

// ---------------------------------------------------------------------------

class SpectrumExperiment final : public Experiment {
 public:
  void parse(Section& s, ordered_json& c) override {
    dim_ = read_dim(s, c);
    L_ = positive(s, "L", 1.0, c);
    n_ = s.integer("n", 64);
    if (n_ < 4) throw SchemaError("'n' must be at least 4");
    c["n"] = n_;
    bc_ = read_bc(s, c);
    zero_ = one_of(s, "noise", "white", {"white", "zero"}, c) == "zero";
    epsilon_ = zero_ ? s.number("epsilon", 0.0) : positive(s, "epsilon", std::nullopt, c);
    renormalize_ = s.boolean("renormalize", true);
    c["renormalize"] = renormalize_;
    k_ = s.integer("k", 6);
    if (k_ < 1) throw SchemaError("'k' must be positive");
    c["k"] = k_;
    tol_ = positive(s, "tol", 1e-8, c);
    read_expect(s, c, [&](Section& e, ordered_json& out) { lambda_1_ = read_range(e, "lambda_1", out); });
  }

  void run(Context& ctx) override {
    const Geometry geo = centered_geometry(dim_, L_, n_);
    const double c_eps = subtracted(geo.grid, epsilon_, zero_, renormalize_);
    std::vector<std::uint64_t> seeds = ctx.cfg.seeds;
    if (zero_) seeds.resize(1);
    std::vector<Spectrum> spectra(seeds.size());
    parallel_for(seeds.size(), ctx.cfg.jobs, [&](std::size_t i) {
      const Field V = potential(ctx, geo.grid, seeds[i], epsilon_, zero_);
      spectra[i] = eigen_smallest(assemble_direct(V, c_eps, bc_, geo.box), k_, tol_);
    });

    double worst = 0.0, lambda_1 = 0.0;
    ordered_json runs = ordered_json::array();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      std::ostringstream os;
      write_spectrum_csv(os, spectra[i]);
      ctx.write(zero_ ? "spectrum.csv" : "spectrum_" + std::to_string(seeds[i]) + ".csv", os.str());
      for (double r : spectra[i].residuals) worst = std::max(worst, r);
      lambda_1 += spectra[i].values.front() / static_cast<double>(seeds.size());
      runs.push_back({{"seed", seeds[i]}, {"values", spectra[i].values}, {"method", spectra[i].method}});
    }
    ctx.summary["c_eps"] = c_eps;
    ctx.summary["mean_lambda_1"] = lambda_1;
    ctx.summary["max_residual"] = worst;
    ctx.summary["runs"] = runs;
    ctx.check("residuals", worst <= tol_, "max residual " + fmt(worst) + " vs tol " + fmt(tol_));
    if (lambda_1_)
      ctx.check("expect.lambda_1", lambda_1_->contains(lambda_1), fmt(lambda_1) + " in " + lambda_1_->describe());
  }

 private:
  int dim_ = 2, n_ = 64, k_ = 6;
  double L_ = 1.0, epsilon_ = 0.0, tol_ = 1e-8;
  Boundary bc_ = Boundary::dirichlet;
  bool zero_ = false, renormalize_ = true;
  std::optional<Range> lambda_1_;
};

// ---------------------------------------------------------------------------

class IdsExperiment final : public Experiment {
 public:
  int default_seeds() const override { return 8; }

  void parse(Section& s, ordered_json& c) override {
    opts_.dim = read_dim(s, c);
    opts_.spacing = positive(s, "h", 1.0 / 32.0, c);
    L_ = s.numbers("L", std::vector<double>{1.0});
    if (L_.empty()) throw SchemaError("'L' must not be empty");
    for (double L : L_)
      if (!(L > 0.0)) throw SchemaError("'L' entries must be positive");
    c["L"] = L_;
    const std::string bc = one_of(s, "bc", "dirichlet", {"dirichlet", "neumann", "both"}, c);
    if (bc != "neumann") bcs_.push_back(Boundary::dirichlet);
    if (bc != "dirichlet") bcs_.push_back(Boundary::neumann);
    opts_.zero_potential = one_of(s, "noise", "white", {"white", "zero"}, c) == "zero";
    epsilon_ = opts_.zero_potential ? s.number("epsilon", 0.0) : positive(s, "epsilon", std::nullopt, c);
    opts_.renormalize = s.boolean("renormalize", true);
    c["renormalize"] = opts_.renormalize;
    lambda_ = read_lambda(s, c, -30.0, 60.0, 120);
    opts_.bootstrap = s.integer("bootstrap", 1000);
    if (opts_.bootstrap < 2) throw SchemaError("'bootstrap' must be at least 2");
    c["bootstrap"] = opts_.bootstrap;
    if (s.has("lifschitz")) {
      Section l(s.raw("lifschitz"));
      const double lo = l.number("lo"), hi = l.number("hi");
      l.finish();
      if (!(lo < hi && hi < 0.0)) throw SchemaError("lifschitz window needs lo < hi < 0");
      lifschitz_ = std::array<double, 2>{lo, hi};
      c["lifschitz"] = {{"lo", lo}, {"hi", hi}};
    }
    weyl_ = s.boolean("weyl", false);
    c["weyl"] = weyl_;
  }

  void run(Context& ctx) override {
    IdsOptions opts = opts_;
    opts.jobs = ctx.cfg.jobs;
    std::vector<std::uint64_t> seeds = ctx.cfg.seeds;
    if (opts.zero_potential) seeds.resize(1);

    std::map<Boundary, std::vector<IdsCurve>> curves;
    ordered_json list = ordered_json::array();
    bool monotone = true;
    for (Boundary bc : bcs_) {
      curves[bc] = estimate_ids(bc, L_, epsilon_, seeds, lambda_, opts);
      for (const IdsCurve& curve : curves[bc]) {
        std::ostringstream os;
        write_ids_csv(os, {curve});
        ctx.write("ids_" + to_string(bc) + "_L" + fmt(curve.L) + ".csv", os.str());
        for (std::size_t i = 1; i < curve.mean.size(); ++i) monotone = monotone && curve.mean[i] >= curve.mean[i - 1];
        list.push_back(describe(curve));
      }
    }
    ctx.summary["curves"] = list;
    ctx.check("monotone_in_lambda", monotone);

    if (curves.size() == 2) {
      long violations = 0;
      for (std::size_t c = 0; c < L_.size(); ++c) {
        const IdsCurve& d = curves[Boundary::dirichlet][c];
        const IdsCurve& n = curves[Boundary::neumann][c];
        for (std::size_t a = 0; a < d.seeds.size(); ++a) {
          const auto b = std::find(n.seeds.begin(), n.seeds.end(), d.seeds[a]);
          if (b == n.seeds.end()) continue;
          const auto& nc = n.counts[static_cast<std::size_t>(b - n.seeds.begin())];
          for (std::size_t i = 0; i < nc.size(); ++i) violations += d.counts[a][i] > nc[i];
        }
      }
      ctx.check("neumann_dominates_dirichlet", violations == 0, std::to_string(violations) + " violations");
    }
  }

 private:
  ordered_json describe(const IdsCurve& curve) const {
    ordered_json j;
    j["bc"] = to_string(curve.bc);
    j["L"] = curve.L;
    j["n_seeds"] = curve.n_seeds();
    j["failed_seeds"] = curve.failed;
    j["partial"] = curve.partial;
    if (lifschitz_) {
      try {
        j["lifschitz"] = ordered_json::parse(to_json(lifschitz_fit(curve, (*lifschitz_)[0], (*lifschitz_)[1])));
      } catch (const FitError& e) {
        j["lifschitz"] = {{"error", e.what()}};
      }
    }
    if (weyl_) {
      try {
        j["weyl"] = ordered_json::parse(to_json(weyl_fit(curve)));
      } catch (const FitError& e) {
        j["weyl"] = {{"error", e.what()}};
      }
    }
    return j;
  }

  IdsOptions opts_;
  std::vector<double> L_, lambda_;
  std::vector<Boundary> bcs_;
  double epsilon_ = 0.0;
  std::optional<std::array<double, 2>> lifschitz_;
  bool weyl_ = false;
};

// ---------------------------------------------------------------------------

class WeylExperiment final : public Experiment {
 public:
  void parse(Section& s, ordered_json& c) override {
    opts_.dim = read_dim(s, c);
    L_ = positive(s, "L", 1.0, c);
    n_ = s.integer("n", 256);
    if (n_ < 8) throw SchemaError("'n' must be at least 8");
    c["n"] = n_;
    opts_.spacing = L_ / n_;
    bc_ = read_bc(s, c);
    opts_.zero_potential = one_of(s, "noise", "zero", {"white", "zero"}, c) == "zero";
    epsilon_ = opts_.zero_potential ? s.number("epsilon", 0.0) : positive(s, "epsilon", std::nullopt, c);
    const double top = positive(s, "lambda_max", 3000.0, c);
    const int points = s.integer("points", 300);
    if (points < 3) throw SchemaError("'points' must be at least 3");
    c["points"] = points;
    for (int i = 1; i <= points; ++i) lambda_.push_back(top * i / points);
    min_count_ = positive(s, "min_count", 50.0, c);
    read_expect(s, c, [&](Section& e, ordered_json& out) {
      raw_ratio_ = read_range(e, "raw_ratio", out);
      leading_ = read_range(e, "leading", out);
    });
  }

  void run(Context& ctx) override {
    IdsOptions opts = opts_;
    opts.jobs = ctx.cfg.jobs;
    std::vector<std::uint64_t> seeds = ctx.cfg.seeds;
    if (opts.zero_potential) seeds.resize(1);
    const std::vector<IdsCurve> curves = estimate_ids(bc_, {L_}, epsilon_, seeds, lambda_, opts);
    std::ostringstream os;
    write_ids_csv(os, curves);
    ctx.write("weyl.csv", os.str());
    const WeylFit fit = weyl_fit(curves.front(), min_count_);
    ctx.summary["fit"] = ordered_json::parse(to_json(fit));
    // Expected ranges are relative to the Weyl constant.
    if (raw_ratio_)
      ctx.check("expect.raw_ratio", raw_ratio_->contains(fit.raw_ratio / fit.target),
                fmt(fit.raw_ratio / fit.target) + " in " + raw_ratio_->describe());
    if (leading_)
      ctx.check("expect.leading", leading_->contains(fit.leading / fit.target),
                fmt(fit.leading / fit.target) + " in " + leading_->describe());
  }

 private:
  IdsOptions opts_;
  double L_ = 1.0, epsilon_ = 0.0, min_count_ = 50.0;
  int n_ = 256;
  Boundary bc_ = Boundary::dirichlet;
  std::vector<double> lambda_;
  std::optional<Range> raw_ratio_, leading_;
};

// ---------------------------------------------------------------------------

class RenormScanExperiment final : public Experiment {
 public:
  void parse(Section& s, ordered_json& c) override {
    dim_ = read_dim(s, c);
    side_ = positive(s, "side", 1.0, c);
    n_ = s.integer("n", dim_ == 2 ? 512 : 64);
    if (n_ < 8) throw SchemaError("'n' must be at least 8");
    c["n"] = n_;
    epsilons_ = s.numbers("epsilons", std::vector<double>{0.25, 0.125, 0.0625, 0.03125, 0.015625});
    if (epsilons_.size() < 2) throw SchemaError("'epsilons' needs at least 2 entries");
    for (double e : epsilons_)
      if (!(e > 0.0)) throw SchemaError("'epsilons' entries must be positive");
    c["epsilons"] = epsilons_;
    method_ = renorm_method_from_string(one_of(s, "method", "fourier_sum", {"fourier_sum", "monte_carlo"}, c));
    samples_ = s.integer("samples", 256);
    if (samples_ < 2) throw SchemaError("'samples' must be at least 2");
    c["samples"] = samples_;
    read_expect(s, c, [&](Section& e, ordered_json& out) {
      slope_ratio_ = read_range(e, "slope_ratio", out);
      if (e.has("r2_min")) {
        r2_min_ = e.number("r2_min");
        out["r2_min"] = *r2_min_;
      }
    });
  }

  void run(Context& ctx) override {
    const Grid g(dim_, side_, n_);
    const RenormScan scan = renorm_scan(g, epsilons_, method_, samples_, ctx.cfg.seeds.front());
    std::ostringstream os;
    os << "epsilon,c_eps,std_error,e1,e3,method,samples\n";
    for (std::size_t i = 0; i < scan.epsilon.size(); ++i) {
      const RenormResult& r = scan.results[i];
      os << fmt(scan.epsilon[i]) << ',' << fmt(r.value) << ',' << fmt(r.std_error) << ',' << fmt(r.e1) << ','
         << fmt(r.e3) << ',' << to_string(r.method) << ',' << r.samples << '\n';
    }
    ctx.write("renorm.csv", os.str());
    ordered_json fit = fit_json(scan.fit);
    const double ratio = scan.fit.slope / renorm_log_rate_2d();
    if (dim_ == 2) fit["slope_ratio"] = ratio;
    ctx.summary["fit"] = fit;
    if (slope_ratio_)
      ctx.check("expect.slope_ratio", slope_ratio_->contains(ratio), fmt(ratio) + " in " + slope_ratio_->describe());
    if (r2_min_) ctx.check("expect.r2_min", scan.fit.r2 >= *r2_min_, fmt(scan.fit.r2) + " >= " + fmt(*r2_min_));
  }

 private:
  int dim_ = 2, n_ = 512, samples_ = 256;
  double side_ = 1.0;
  std::vector<double> epsilons_;
  RenormMethod method_ = RenormMethod::fourier_sum;
  std::optional<Range> slope_ratio_;
  std::optional<double> r2_min_;
};

// ---------------------------------------------------------------------------

class BesovScanExperiment final : public Experiment {
 public:
  int default_seeds() const override { return 64; }

  void parse(Section& s, ordered_json& c) override {
    dim_ = read_dim(s, c);
    side_ = positive(s, "side", 1.0, c);
    n_ = s.integer("n", 256);
    if (n_ < 16) throw SchemaError("'n' must be at least 16");
    c["n"] = n_;
    riesz_ = one_of(s, "noise", "white", {"white", "riesz"}, c) == "riesz";
    if (riesz_) {
      alpha_ = s.number("alpha");
      if (!(alpha_ > 0.0 && alpha_ < dim_)) throw SchemaError("'alpha' must lie in (0, d)");
      c["alpha"] = alpha_;
    }
    if (s.has("p") && s.raw("p").is_string()) {
      if (s.string("p") != "inf") throw SchemaError("'p' must be a number >= 1 or \"inf\"");
      p_ = kInf;
      c["p"] = "inf";
    } else {
      p_ = s.number("p", 2.0);
      if (!(p_ >= 1.0)) throw SchemaError("'p' must be a number >= 1 or \"inf\"");
      c["p"] = p_;
    }
    j_min_ = s.integer("j_min", 1);
    j_max_ = s.integer("j_max", -1);
    c["j_min"] = j_min_;
    c["j_max"] = j_max_;
    read_expect(s, c, [&](Section& e, ordered_json& out) { slope_ = read_range(e, "slope", out); });
  }

  void run(Context& ctx) override {
    const Grid g(dim_, side_, n_);
    const int j_max = j_max_ < 0 ? last_complete_block(g) : j_max_;
    if (j_min_ < -1 || j_max - j_min_ < 2) throw ParameterError("besov-scan needs at least 3 blocks");
    const auto& seeds = ctx.cfg.seeds;
    std::vector<std::vector<double>> norms(seeds.size());
    parallel_for(seeds.size(), ctx.cfg.jobs, [&](std::size_t i) {
      const Field f = cached_noise(riesz_ ? "riesz" : "white", g, seeds[i], alpha_, ctx.cfg.cache);
      norms[i] = lp_block_norms(f, p_);
      if (norms[i].size() < static_cast<std::size_t>(j_max + 2))
        throw ParameterError("requested LP block lies beyond the lattice");
    });

    std::ostringstream os;
    os << "seed,j,norm\n";
    std::vector<double> x, y;
    for (int j = j_min_; j <= j_max; ++j) {
      double mean_log2 = 0.0;
      for (std::size_t i = 0; i < seeds.size(); ++i)
        mean_log2 += std::log2(norms[i][static_cast<std::size_t>(j + 1)]) / static_cast<double>(seeds.size());
      x.push_back(j);
      y.push_back(mean_log2);
    }
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (int j = j_min_; j <= j_max; ++j)
        os << seeds[i] << ',' << j << ',' << fmt(norms[i][static_cast<std::size_t>(j + 1)]) << '\n';
    ctx.write("besov.csv", os.str());

    const stats::LinearFit fit = stats::linear_fit(x, y);
    ctx.summary["levels"] = x;
    ctx.summary["mean_log2"] = y;
    ctx.summary["fit"] = fit_json(fit);
    if (p_ == 2.0) ctx.summary["target_slope"] = riesz_ ? alpha_ / 2.0 : dim_ / 2.0;
    if (slope_) ctx.check("expect.slope", slope_->contains(fit.slope), fmt(fit.slope) + " in " + slope_->describe());
  }

 private:
  int dim_ = 2, n_ = 256, j_min_ = 1, j_max_ = -1;
  double side_ = 1.0, alpha_ = 0.0, p_ = 2.0;
  bool riesz_ = false;
  std::optional<Range> slope_;
};

// ---------------------------------------------------------------------------

class AdditivityExperiment final : public Experiment {
 public:
  int default_seeds() const override { return 16; }

  void parse(Section& s, ordered_json& c) override {
    dim_ = read_dim(s, c);
    L_ = positive(s, "L", 2.0, c);
    h_ = positive(s, "h", 1.0 / 16.0, c);
    zero_ = one_of(s, "noise", "white", {"white", "zero"}, c) == "zero";
    epsilon_ = zero_ ? s.number("epsilon", 0.0) : positive(s, "epsilon", 0.125, c);
    renormalize_ = s.boolean("renormalize", true);
    c["renormalize"] = renormalize_;
    std::vector<double> split(static_cast<std::size_t>(dim_), 1.0);
    split[0] = 2.0;
    const std::vector<double> parts = s.numbers("parts", split);
    if (parts.size() != static_cast<std::size_t>(dim_)) throw SchemaError("'parts' needs one entry per axis");
    for (int a = 0; a < dim_; ++a) {
      if (parts[a] < 1 || parts[a] != std::floor(parts[a])) throw SchemaError("'parts' entries must be positive integers");
      opts_.parts[a] = static_cast<int>(parts[a]);
    }
    c["parts"] = std::vector<int>(opts_.parts.begin(), opts_.parts.begin() + dim_);
    nested_side_ = s.number("nested_side", L_ / 2.0);
    if (nested_side_ < 0.0 || nested_side_ >= L_) throw SchemaError("'nested_side' must lie in [0, L)");
    c["nested_side"] = nested_side_;
    if (s.has("ims")) {
      Section i(s.raw("ims"));
      const double tile = i.number("tile"), overlap = i.number("overlap", 0.25);
      i.finish();
      if (!(tile > 0.0 && overlap > 0.0 && 2.0 * overlap < tile)) throw SchemaError("ims needs 0 < 2 overlap < tile");
      opts_.ims_tile = tile;
      opts_.ims_overlap = overlap;
      c["ims"] = {{"tile", tile}, {"overlap", overlap}};
    }
    lambda_ = read_lambda(s, c, -30.0, 60.0, 120);
  }

  void run(Context& ctx) override {
    const double cells = 2.0 * L_ / h_;
    const int n = static_cast<int>(std::lround(cells));
    if (std::abs(cells - n) > 1e-9 * cells) throw ParameterError("torus side 2L must be a multiple of h");
    const Grid g(dim_, 2.0 * L_, n);
    const Box box = Box::centered(g, L_);
    validate_box(g, box);
    AdditivityOptions opts = opts_;
    if (nested_side_ > 0.0) opts.nested = Box::centered(g, nested_side_);
    const double c_eps = subtracted(g, epsilon_, zero_, renormalize_);

    const auto& seeds = ctx.cfg.seeds;
    std::vector<AdditivityReport> reports(seeds.size());
    parallel_for(seeds.size(), ctx.cfg.jobs, [&](std::size_t i) {
      reports[i] = additivity_check(potential(ctx, g, seeds[i], epsilon_, zero_), c_eps, box, lambda_, opts);
    });

    std::ostringstream os;
    os << "seed,lambda,dirichlet,neumann,dirichlet_tiles,neumann_tiles,nested,ims_tiles\n";
    std::map<std::string, long> totals{{"bracket", 0}, {"nested", 0}, {"dirichlet", 0}, {"neumann", 0}, {"ims", 0}};
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const AdditivityReport& r = reports[s];
      for (std::size_t i = 0; i < r.lambda.size(); ++i) {
        os << seeds[s] << ',' << fmt(r.lambda[i]) << ',' << r.dirichlet[i] << ',' << r.neumann[i] << ','
           << r.dirichlet_tiles[i] << ',' << r.neumann_tiles[i] << ',';
        if (!r.nested.empty()) os << r.nested[i];
        os << ',';
        if (!r.ims_tiles.empty()) os << r.ims_tiles[i];
        os << '\n';
      }
      totals["bracket"] += r.bracket_violations;
      totals["nested"] += r.nested_violations;
      totals["dirichlet"] += r.dirichlet_violations;
      totals["neumann"] += r.neumann_violations;
      totals["ims"] += r.ims_violations;
    }
    ctx.write("additivity.csv", os.str());
    ctx.summary["c_eps"] = c_eps;
    ctx.summary["violations"] = totals;
    for (const auto& [name, count] : totals) ctx.check(name + "_violations", count == 0, std::to_string(count));
  }

 private:
  int dim_ = 2;
  double L_ = 2.0, h_ = 1.0 / 16.0, epsilon_ = 0.125, nested_side_ = 1.0;
  bool zero_ = false, renormalize_ = true;
  AdditivityOptions opts_;
  std::vector<double> lambda_;
};

// ---------------------------------------------------------------------------

class TransformCheckExperiment final : public Experiment {
 public:
  void parse(Section& s, ordered_json& c) override {
    if (s.has("dim") && s.integer("dim") != 2) throw SchemaError("transform-check is two-dimensional");
    L_ = positive(s, "L", 1.0, c);
    n_ = s.integer("n", 64);
    if (n_ < 8) throw SchemaError("'n' must be at least 8");
    c["n"] = n_;
    epsilon_ = positive(s, "epsilon", std::nullopt, c);
    opts_.bc = read_bc(s, c);
    opts_.k = s.integer("k", 5);
    if (opts_.k < 1) throw SchemaError("'k' must be positive");
    c["k"] = opts_.k;
    if (s.has("level") && s.raw("level").is_number_integer()) {
      opts_.level = s.integer("level");
      if (*opts_.level < 0) throw SchemaError("'level' must be nonnegative");
      c["level"] = *opts_.level;
    } else if (s.string("level", "auto") != "auto") {
      throw SchemaError("'level' must be an integer or \"auto\"");
    } else {
      c["level"] = "auto";
    }
    opts_.delta_minus = positive(s, "delta_minus", 0.3, c);
    opts_.gamma = positive(s, "gamma", 1.0, c);
    read_expect(s, c, [&](Section& e, ordered_json& out) {
      if (e.has("max_rel_diff")) {
        max_rel_diff_ = e.number("max_rel_diff");
        out["max_rel_diff"] = *max_rel_diff_;
      }
    });
  }

  void run(Context& ctx) override {
    const Geometry geo = centered_geometry(2, L_, n_);
    const auto& seeds = ctx.cfg.seeds;
    std::vector<TransformComparison> out(seeds.size());
    parallel_for(seeds.size(), ctx.cfg.jobs, [&](std::size_t i) {
      out[i] = compare_transform(cached_noise("white", geo.grid, seeds[i], 0.0, ctx.cfg.cache), Mollifier{epsilon_},
                                 geo.box, opts_);
    });
    std::ostringstream os;
    os << "seed,index,direct,transformed,rel_diff\n";
    ordered_json runs = ordered_json::array();
    double worst = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const TransformComparison& t = out[s];
      for (std::size_t i = 0; i < t.direct.size(); ++i)
        os << seeds[s] << ',' << i + 1 << ',' << fmt(t.direct[i]) << ',' << fmt(t.transformed[i]) << ','
           << fmt(std::abs(t.direct[i] - t.transformed[i]) / std::max(1.0, std::abs(t.direct[i]))) << '\n';
      worst = std::max(worst, t.max_rel_diff);
      runs.push_back(
          {{"seed", seeds[s]}, {"level", t.level}, {"w_sup", t.w_sup}, {"c_eps", t.c_eps}, {"max_rel_diff", t.max_rel_diff}});
    }
    ctx.write("transform.csv", os.str());
    ctx.summary["max_rel_diff"] = worst;
    ctx.summary["runs"] = runs;
    if (max_rel_diff_)
      ctx.check("expect.max_rel_diff", worst <= *max_rel_diff_, fmt(worst) + " <= " + fmt(*max_rel_diff_));
  }

 private:
  double L_ = 1.0, epsilon_ = 0.0;
  int n_ = 64;
  TransformOptions opts_;
  std::optional<double> max_rel_diff_;
};

// ---------------------------------------------------------------------------

class SampleExperiment final : public Experiment {
 public:
  void parse(Section& s, ordered_json& c) override {
    dim_ = read_dim(s, c);
    side_ = positive(s, "side", 1.0, c);
    n_ = s.integer("n", 64);
    if (n_ < 4) throw SchemaError("'n' must be at least 4");
    c["n"] = n_;
    kind_ = one_of(s, "noise", "white", {"white", "riesz"}, c);
    if (kind_ == "riesz") {
      alpha_ = s.number("alpha");
      if (!(alpha_ > 0.0 && alpha_ < dim_)) throw SchemaError("'alpha' must lie in (0, d)");
      c["alpha"] = alpha_;
    }
    epsilon_ = s.number("epsilon", 0.0);
    if (epsilon_ < 0.0) throw SchemaError("'epsilon' must be nonnegative");
    c["epsilon"] = epsilon_;
  }

  void run(Context& ctx) override {
    const Grid g(dim_, side_, n_);
    const auto& seeds = ctx.cfg.seeds;
    std::vector<std::optional<Field>> fields(seeds.size());
    parallel_for(seeds.size(), ctx.cfg.jobs, [&](std::size_t i) {
      Field f = cached_noise(kind_, g, seeds[i], alpha_, ctx.cfg.cache);
      if (epsilon_ > 0.0) {
        const FieldMeta meta = f.meta();
        f = mollify(f, Mollifier{epsilon_});
        f.meta() = meta;
        f.meta().epsilon = epsilon_;
      }
      fields[i] = std::move(f);
    });
    std::filesystem::create_directories(ctx.cfg.output / "fields");
    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const std::string stem = "fields/" + kind_ + "_" + std::to_string(seeds[i]);
      write_field(ctx.cfg.output / stem, *fields[i]);
      ctx.add(stem + ".f64");
      ctx.add(stem + ".json");
      list.push_back({{"seed", seeds[i]}, {"mean", fields[i]->mean()}, {"max_abs", fields[i]->max_abs()}});
    }
    ctx.summary["fields"] = list;
  }

 private:
  int dim_ = 2, n_ = 64;
  double side_ = 1.0, alpha_ = 0.0, epsilon_ = 0.0;
  std::string kind_ = "white";
};

}  // namespace

std::unique_ptr<Experiment> make_experiment(const std::string& kind) {
  if (kind == "spectrum") return std::make_unique<SpectrumExperiment>();
  if (kind == "ids") return std::make_unique<IdsExperiment>();
  if (kind == "weyl") return std::make_unique<WeylExperiment>();
  if (kind == "renorm-scan") return std::make_unique<RenormScanExperiment>();
  if (kind == "besov-scan") return std::make_unique<BesovScanExperiment>();
  if (kind == "additivity") return std::make_unique<AdditivityExperiment>();
  if (kind == "transform-check") return std::make_unique<TransformCheckExperiment>();
  if (kind == "sample") return std::make_unique<SampleExperiment>();
  throw SchemaError("unknown experiment '" + kind + "'");
}

}  // namespace anderson::cli

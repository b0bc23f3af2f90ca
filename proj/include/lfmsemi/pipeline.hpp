#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfmsemi/verify.hpp"

namespace lfmsemi {

using json = nlohmann::json;

// ============================================================ JSON values

namespace io {

/// Doubles as JSON numbers; non-finite values as strings so nothing is lost.
inline json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double num_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

inline json cnum(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

inline json vec(const CVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(cnum(v(i)));
  return a;
}

inline json rvec(const RVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline json mat(const CMatrix& m) {
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(cnum(m(i, k)));
    a.push_back(std::move(row));
  }
  return a;
}

inline json blocks(const BlockSizes& b) { return {{"p", b.p}, {"q", b.q}, {"r", b.r}}; }

inline json margins(const std::vector<ConditionMargin>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back({{"condition", c.condition}, {"margin", num(c.margin)}, {"pass", c.pass}});
  return a;
}

inline json check(const CheckReport& r) {
  json j = {{"check_id", r.check_id},
            {"pass", r.pass},
            {"worst_margin", num(r.worst_margin)},
            {"tolerance", num(r.tolerance)},
            {"samples_used", r.samples_used}};
  j["worst_point"] = r.worst_point ? vec(*r.worst_point) : json(nullptr);
  return j;
}

inline json params(const FormParams& p) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EllipticSplitParams>) {
          return {{"lambda", vec(x.lambda)}, {"A1", mat(x.a1)}};
        } else if constexpr (std::is_same_v<T, EllipticU0Params>) {
          return {{"A_hat", mat(x.a_hat)}, {"delta", num(x.delta)}};
        } else if constexpr (std::is_same_v<T, ParabolicParams>) {
          return {{"blocks", blocks(x.blocks)}, {"a", vec(x.a)},         {"c", vec(x.c)},
                  {"b", cnum(x.b)},             {"D", vec(x.d)},         {"A", mat(x.a_block)}};
        } else {
          return {{"blocks", blocks(x.blocks)}, {"lambda", num(x.lambda)}, {"b", cnum(x.b)},
                  {"coupling", vec(x.coupling)}, {"c", vec(x.c)},          {"D", vec(x.d)},
                  {"A", mat(x.a_block)}};
        }
      },
      p);
}

inline json generator_data(const GeneratorData& g) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EllipticSplitGen>) {
          return {{"theta", rvec(x.theta)}, {"M", mat(x.m)}};
        } else if constexpr (std::is_same_v<T, EllipticU0Gen>) {
          return {{"M", mat(x.m)}, {"delta", num(x.delta)}};
        } else if constexpr (std::is_same_v<T, ParabolicGen>) {
          return {{"blocks", blocks(x.blocks)}, {"a", vec(x.a)},         {"beta_re", num(x.beta_re)},
                  {"alpha", cnum(x.alpha)},     {"theta_D", rvec(x.theta_d)}, {"M", mat(x.m)},
                  {"c", vec(x.c)}};
        } else if constexpr (std::is_same_v<T, HyperbolicGen>) {
          return {{"blocks", blocks(x.blocks)}, {"lambda", num(x.lambda)}, {"b", cnum(x.b)},
                  {"a", vec(x.a)},              {"theta_D", rvec(x.theta_d)}, {"M", mat(x.m)}};
        } else {
          return {{"lambda", num(x.lambda)}, {"a", cnum(x.a)}, {"b", vec(x.b)}};
        }
      },
      g);
}

}  // namespace io

// ============================================================ map specifications

/// One map per document. Complex numbers are always [re, im].
struct MapSpec {
  std::string name;
  std::string description;
  Index dimension = 0;
  Domain domain = Domain::Ball;
  // ball fields
  CMatrix A;
  CVector B, C;
  cplx D = 1.0;
  // Siegel fields
  cplx lambda = 1.0;
  CMatrix M;
  CVector a, c;
  cplx b = 0.0;
  json raw;
  std::map<std::string, int> field_lines;

  std::string where(const std::string& field) const {
    const auto it = field_lines.find(field);
    return it == field_lines.end() ? "field " + field : "line " + std::to_string(it->second) + ", field " + field;
  }
};

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t off) {
  off = std::min(off, text.size());
  return 1 + int(std::count(text.begin(), text.begin() + std::ptrdiff_t(off), '\n'));
}

// first line that mentions "key": in the document
inline std::map<std::string, int> key_lines(const std::string& text) {
  std::map<std::string, int> out;
  for (const char* k : {"name", "description", "dimension", "domain", "A", "B", "C", "D", "lambda", "M", "a", "b", "c"}) {
    const std::string needle = std::string("\"") + k + "\"";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      std::size_t q = pos + needle.size();
      while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
      if (q < text.size() && text[q] == ':') {
        out[k] = line_of_offset(text, pos);
        break;
      }
      pos = q;
    }
  }
  return out;
}

struct SpecReader {
  const json& doc;
  const MapSpec& spec;

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw Error(ErrorKind::Parse, spec.where(field) + ": " + msg);
  }

  const json& need(const std::string& field) const {
    if (!doc.contains(field)) fail(field, "missing");
    return doc.at(field);
  }

  cplx complex(const json& j, const std::string& path, const std::string& field) const {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      fail(field, path + " must be a [re, im] pair of numbers");
    }
    const cplx z(j[0].get<double>(), j[1].get<double>());
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(field, path + " is not finite");
    return z;
  }

  cplx scalar(const std::string& field) const { return complex(need(field), field, field); }

  CVector vector(const std::string& field, Index n) const {
    const json& j = need(field);
    if (!j.is_array()) fail(field, "must be an array of [re, im] pairs");
    if (Index(j.size()) != n) fail(field, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
    CVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = complex(j[std::size_t(i)], field + "[" + std::to_string(i) + "]", field);
    return v;
  }

  CMatrix matrix(const std::string& field, Index n) const {
    const json& j = need(field);
    if (!j.is_array() || Index(j.size()) != n) fail(field, "expected " + std::to_string(n) + " rows");
    CMatrix m(n, n);
    for (Index i = 0; i < n; ++i) {
      const json& row = j[std::size_t(i)];
      if (!row.is_array() || Index(row.size()) != n) {
        fail(field, "row " + std::to_string(i) + " must have " + std::to_string(n) + " entries");
      }
      for (Index k = 0; k < n; ++k) {
        m(i, k) = complex(row[std::size_t(k)], field + "[" + std::to_string(i) + "][" + std::to_string(k) + "]", field);
      }
    }
    return m;
  }
};

}  // namespace detail

inline MapSpec parse_map_spec(const std::string& text) {
  MapSpec spec;
  try {
    spec.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(detail::line_of_offset(text, e.byte ? e.byte - 1 : 0)) +
                                      ": malformed document: " + e.what());
  }
  spec.field_lines = detail::key_lines(text);
  if (!spec.raw.is_object()) throw Error(ErrorKind::Parse, "line 1: the document must be an object");
  const detail::SpecReader rd{spec.raw, spec};
  if (spec.raw.contains("name")) {
    if (!spec.raw["name"].is_string()) rd.fail("name", "must be a string");
    spec.name = spec.raw["name"].get<std::string>();
  }
  if (spec.raw.contains("description")) {
    if (!spec.raw["description"].is_string()) rd.fail("description", "must be a string");
    spec.description = spec.raw["description"].get<std::string>();
  }
  const json& dim = rd.need("dimension");
  if (!dim.is_number_integer() || dim.get<long long>() < 1 || dim.get<long long>() > 64) {
    rd.fail("dimension", "must be an integer in [1, 64]");
  }
  spec.dimension = Index(dim.get<long long>());
  const Index n = spec.dimension;
  const json& dom = rd.need("domain");
  if (!dom.is_string() || (dom != "ball" && dom != "siegel")) rd.fail("domain", "must be \"ball\" or \"siegel\"");
  if (dom == "ball") {
    spec.domain = Domain::Ball;
    spec.A = rd.matrix("A", n);
    spec.B = rd.vector("B", n);
    spec.C = rd.vector("C", n);
    spec.D = rd.scalar("D");
  } else {
    spec.domain = Domain::Siegel;
    spec.lambda = rd.scalar("lambda");
    spec.M = rd.matrix("M", n - 1);
    spec.a = rd.vector("a", n - 1);
    spec.b = rd.scalar("b");
    spec.c = rd.vector("c", n - 1);
  }
  return spec;
}

/// The map in ball coordinates; constructor invariants surface as parse errors
/// that name the offending field.
inline BallMap to_ball_map(const MapSpec& spec) {
  const detail::SpecReader rd{spec.raw, spec};
  if (spec.domain == Domain::Ball) {
    try {
      return BallMap::make(spec.A, spec.B, spec.C, spec.D);
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.find("denominator") != std::string::npos) rd.fail("C", msg);
      rd.fail("A", msg);
    }
  }
  SiegelMap g(spec.lambda, spec.M, spec.a, spec.b, spec.c);
  for (const auto& c : siegel_conditions(g)) {
    if (!c.pass) rd.fail(c.condition == "lambda.real" ? "lambda" : "b", "self-map condition " + c.condition + " violated");
  }
  const BallMap f = cayley_to_ball(g);
  SamplerCfg cfg;
  cfg.count = 256;
  if (!check_self_map(f, cfg, 1e-9).pass) rd.fail("M", "self-map invariant violated");
  return f;
}

// ============================================================ reports

enum class PipelineStage { Classify = 0, Normalize = 1, Embed = 2, Build = 3, Verify = 4 };

struct PipelineOptions {
  std::uint64_t seed = 20240611;
  std::string tol_profile = "default";
  std::size_t count = 200;
  unsigned threads = 1;
  PipelineStage last = PipelineStage::Verify;
  std::optional<CVector> z0;
  std::vector<double> t_grid;
};

inline Tolerances tolerances_for(const std::string& profile) {
  if (profile == "default") return Tolerances::defaults();
  if (profile == "strict") return Tolerances::strict();
  throw Error(ErrorKind::Parse, "unknown tolerance profile " + profile);
}

struct StageRecord {
  std::string name;
  std::string status = "skipped";  // ok | error | skipped
  std::string error;
  json data = json::object();
};

struct Report {
  int schema_version = 1;
  std::string name;
  json input;
  json options;
  std::vector<StageRecord> stages;
  std::string verdict;
  json trajectory;  // null or {t: [...], points: [...]}
  int exit_code = 2;

  const StageRecord* stage(const std::string& n) const {
    for (const auto& s : stages)
      if (s.name == n) return &s;
    return nullptr;
  }
};

inline json to_json(const Report& r) {
  json st = json::array();
  for (const auto& s : r.stages) {
    st.push_back({{"name", s.name}, {"status", s.status}, {"error", s.error}, {"data", s.data}});
  }
  return {{"schema_version", r.schema_version},
          {"name", r.name},
          {"input", r.input},
          {"options", r.options},
          {"stages", st},
          {"verdict", r.verdict},
          {"trajectory", r.trajectory},
          {"exit_code", r.exit_code}};
}

inline Report report_from_json(const json& j) {
  Report r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    r.name = j.at("name").get<std::string>();
    r.input = j.at("input");
    r.options = j.at("options");
    for (const auto& s : j.at("stages")) {
      r.stages.push_back({s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                          s.at("error").get<std::string>(), s.at("data")});
    }
    r.verdict = j.at("verdict").get<std::string>();
    r.trajectory = j.at("trajectory");
    r.exit_code = j.at("exit_code").get<int>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline std::string dump_report(const Report& r) { return to_json(r).dump(2) + "\n"; }

// ------------------------------------------------------------ trajectories

struct TrajectoryRow {
  double t = 0.0;
  CVector point;
};

/// at(t)(z0) in input coordinates along a strictly increasing grid.
inline std::vector<TrajectoryRow> emit_trajectory(const SemigroupFamily& sg, const CVector& z0,
                                                  const std::vector<double>& t_grid) {
  if (z0.size() != sg.dim()) throw Error(ErrorKind::Dimension, "z0 has the wrong dimension");
  if (!(ball_margin(z0) > 0.0)) throw Error(ErrorKind::Domain, "z0 is not inside the ball");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || !std::isfinite(t_grid[i])) throw Error(ErrorKind::Domain, "t must be finite and >= 0");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw Error(ErrorKind::Domain, "t grid must be strictly increasing");
  }
  std::vector<TrajectoryRow> rows;
  for (double t : t_grid) rows.push_back({t, sg.at_input(t).apply(z0)});
  return rows;
}

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, Index dim) {
  std::string out = "t";
  for (Index i = 1; i <= dim; ++i) out += ",re_" + std::to_string(i) + ",im_" + std::to_string(i);
  out += "\n";
  for (const auto& r : rows) {
    out += format_g17(r.t);
    for (Index i = 0; i < r.point.size(); ++i) out += "," + format_g17(r.point(i).real()) + "," + format_g17(r.point(i).imag());
    out += "\n";
  }
  return out;
}

inline const std::vector<double>& default_trajectory_grid() {
  static const std::vector<double> g = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  return g;
}

// ------------------------------------------------------------ pipeline

struct PipelineResult {
  Report report;
  std::optional<BallMap> map;
  std::optional<EmbeddingCertificate> certificate;
  std::optional<SemigroupFamily> family;
  std::vector<TrajectoryRow> trajectory;
};

inline int exit_code_for(Verdict v) {
  switch (v) {
    case Verdict::Embeddable: return 0;
    case Verdict::ConditionFails: return 1;
    case Verdict::Inconclusive: return 2;
  }
  return 2;
}

namespace detail {

inline json classification_json(const Classification& c, const BallMap& f, const Tolerances& tol) {
  json j = {{"kind", std::string(to_string(c.kind))}};
  json fps = json::array();
  for (const auto& p : c.interior_fixed_points) fps.push_back(io::vec(p));
  j["interior_fixed_points"] = fps;
  json dims = json::array();
  for (Index d : c.interior_slice_dim) dims.push_back(d);
  j["interior_slice_dim"] = dims;
  json bps = json::array();
  for (const auto& p : c.boundary_fixed_points) bps.push_back(io::vec(p));
  j["boundary_fixed_points"] = bps;
  json bd = json::array();
  for (double d : c.boundary_dilations) bd.push_back(io::num(d));
  j["boundary_dilations"] = bd;
  j["dw_point"] = c.dw_point ? io::vec(*c.dw_point) : json(nullptr);
  j["delta"] = c.delta ? io::num(*c.delta) : json(nullptr);
  j["parabolic_margin"] = io::num(c.parabolic_margin);
  if (c.kind == MapKind::Elliptic) j["unitary_index"] = unitary_index(f, c.interior_fixed_points.front(), tol);
  return j;
}

inline json normal_form_json(const NormalForm& nf) {
  json chain = json::array();
  for (const auto& s : nf.chain) chain.push_back(s.name);
  json j = {{"form", std::string(to_string(nf.kind))},
            {"domain", std::string(to_string(nf.domain))},
            {"params", io::params(nf.params)},
            {"chain", chain},
            {"chain_residual", io::num(nf.chain_residual)},
            {"conditions", io::margins(nf.conditions)}};
  j["ball_delta"] = nf.ball_delta ? io::num(*nf.ball_delta) : json(nullptr);
  return j;
}

inline json certificate_json(const EmbeddingCertificate& c) {
  json j = {{"verdict", std::string(to_string(c.verdict))},
            {"criterion_id", c.criterion_id},
            {"margins", io::margins(c.margins)},
            {"notes", c.notes}};
  j["witness"] = c.witness ? io::vec(*c.witness) : json(nullptr);
  return j;
}

inline NormalForm normal_form_for(const BallMap& f, const Classification& cls, const Tolerances& tol) {
  switch (cls.kind) {
    case MapKind::Elliptic:
      if (unitary_index(f, cls.interior_fixed_points.front(), tol) == 0) return elliptic_u0(f, tol);
      return elliptic_split(f, tol);
    case MapKind::Parabolic: return parabolic_normal_form(f, tol);
    case MapKind::Hyperbolic: return hyperbolic_normal_form(f, tol);
  }
  throw Error(ErrorKind::Internal, "unknown map kind");
}

inline EmbeddingCertificate certificate_for(const BallMap& f, const Classification& cls, const NormalForm& nf,
                                            bool automorphism, const SamplerCfg& cfg, const Tolerances& tol) {
  if (automorphism) return embed_automorphism(f, true, tol);
  if (f.dim() == 2 && cls.kind != MapKind::Elliptic) return embed_dim2(f, tol);
  switch (nf.kind) {
    case FormKind::EllipticUnitarySplit: return embed_elliptic_split(nf, tol.branch_search, tol);
    case FormKind::EllipticU0: return embed_elliptic_u0(nf, cfg, tol);
    case FormKind::ParabolicSiegel: return embed_parabolic(nf, tol);
    case FormKind::HyperbolicSiegel: return embed_hyperbolic(nf, tol);
  }
  throw Error(ErrorKind::Internal, "unknown normal form");
}

}  // namespace detail

/// classify -> normalize -> embed -> build -> verify. Stage errors are recorded
/// in the report and the remaining stages are marked skipped.
inline PipelineResult run_pipeline(const MapSpec& spec, const PipelineOptions& opt) {
  PipelineResult res;
  Report& rep = res.report;
  rep.name = spec.name;
  rep.input = spec.raw;
  rep.options = {{"seed", opt.seed}, {"tol_profile", opt.tol_profile}, {"count", opt.count}};
  for (const char* n : {"classify", "normalize", "embed", "build", "verify"}) rep.stages.push_back({n});
  const Tolerances tol = tolerances_for(opt.tol_profile);
  SamplerCfg cfg;
  cfg.seed = opt.seed;
  cfg.count = opt.count;
  cfg.threads = opt.threads;

  const BallMap f = to_ball_map(spec);
  res.map = f;
  const bool identity = f.is_identity(1e-12);
  const bool automorphism = identity || is_automorphism(f, tol.fixed_point);
  const int last = int(opt.last);
  bool failed = false;
  std::optional<Classification> cls;
  std::optional<NormalForm> nf;

  auto run = [&](int idx, auto&& body) {
    if (failed || idx > last) return;
    StageRecord& s = rep.stages[std::size_t(idx)];
    try {
      body(s.data);
      s.status = "ok";
    } catch (const std::exception& e) {
      s.status = "error";
      s.error = e.what();
      failed = true;
    }
  };

  run(0, [&](json& d) {
    if (identity) {
      d = {{"kind", "identity"}, {"automorphism", true}};
      return;
    }
    cls = classify(f, tol);
    d = detail::classification_json(*cls, f, tol);
    d["automorphism"] = automorphism;
  });
  run(1, [&](json& d) {
    if (identity) {
      d = {{"form", "identity"}};
      return;
    }
    nf = detail::normal_form_for(f, *cls, tol);
    d = detail::normal_form_json(*nf);
  });
  run(2, [&](json& d) {
    res.certificate = identity ? embed_automorphism(f, true, tol)
                               : detail::certificate_for(f, *cls, *nf, automorphism, cfg, tol);
    d = detail::certificate_json(*res.certificate);
    rep.verdict = std::string(to_string(res.certificate->verdict));
  });
  if (res.certificate && res.certificate->verdict != Verdict::Embeddable) {
    rep.stages[3].error = rep.stages[4].error = "no embeddable certificate";
  }
  const bool embeddable = res.certificate && res.certificate->verdict == Verdict::Embeddable;
  if (embeddable) {
    run(3, [&](json& d) {
      res.family = build_semigroup(*res.certificate);
      d = {{"family", std::string(to_string(res.family->kind()))},
           {"domain", std::string(to_string(res.family->domain()))},
           {"generator_data", io::generator_data(res.family->data())},
           {"generator_matrix", io::mat(res.family->generator_matrix())}};
    });
  }
  bool verified = false;
  if (res.family) {
    run(4, [&](json& d) {
      const FamilyChecks fc = verify_family(*res.family, f.projective(), cfg, tol);
      json checks = json::array();
      for (const auto& r : fc.reports) checks.push_back(io::check(r));
      bool pass = fc.pass();
      if (res.family->domain() == Domain::Siegel) {
        const CheckReport sc = check_siegel_conditions(*res.family, condition_t_grid());
        checks.push_back(io::check(sc));
        pass = pass && sc.pass;
      }
      const GeneratorRefinement g = generator_refinement(*res.family, cfg, tol.fd_step);
      d = {{"checks", checks},
           {"pass", pass},
           {"generator_refinement",
            {{"residual_h", io::num(g.residual_h)},
             {"residual_half", io::num(g.residual_half)},
             {"ratio", io::num(g.ratio)},
             {"truncation_dominated", g.truncation_dominated}}}};
      verified = pass;
    });
  }
  if (res.family && opt.z0 && !failed) {
    const auto& grid = opt.t_grid.empty() ? default_trajectory_grid() : opt.t_grid;
    res.trajectory = emit_trajectory(*res.family, *opt.z0, grid);
    json ts = json::array(), pts = json::array();
    for (const auto& r : res.trajectory) {
      ts.push_back(io::num(r.t));
      pts.push_back(io::vec(r.point));
    }
    rep.trajectory = {{"t", ts}, {"points", pts}};
  }

  if (failed) {
    rep.exit_code = 2;
  } else if (last < int(PipelineStage::Embed)) {
    rep.exit_code = 0;
  } else if (!embeddable) {
    rep.exit_code = exit_code_for(res.certificate->verdict);
  } else if (last < int(PipelineStage::Verify)) {
    rep.exit_code = 0;
  } else {
    rep.exit_code = verified ? 0 : 2;
  }
  return res;
}

/// Short human-readable digest of a report.
inline std::string summary_text(const Report& r) {
  std::ostringstream os;
  os << "map: " << (r.name.empty() ? "(unnamed)" : r.name) << "\n";
  for (const auto& s : r.stages) {
    os << "  " << s.name << ": " << s.status;
    if (s.status == "ok") {
      const json& d = s.data;
      if (s.name == "classify") {
        os << " kind=" << d.value("kind", "?");
        if (d.contains("delta") && d["delta"].is_number()) os << " delta=" << format_g17(d["delta"].get<double>());
      } else if (s.name == "normalize") {
        os << " form=" << d.value("form", "?");
      } else if (s.name == "embed") {
        os << " verdict=" << d.value("verdict", "?") << " criterion=" << d.value("criterion_id", "?");
      } else if (s.name == "build") {
        os << " family=" << d.value("family", "?");
      } else if (s.name == "verify") {
        os << (d.value("pass", false) ? " all checks pass" : " CHECK FAILURE");
        for (const auto& c : d["checks"]) {
          os << "\n    " << c["check_id"].get<std::string>() << ": " << (c["pass"].get<bool>() ? "pass" : "FAIL")
             << " worst_margin=" << c["worst_margin"].dump();
        }
      }
    } else if (!s.error.empty()) {
      os << " (" << s.error << ")";
    }
    os << "\n";
  }
  os << "exit: " << r.exit_code << "\n";
  return os.str();
}

}  // namespace lfmsemi

#include "halflab/potential.hpp"

#include "halflab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace halflab {

namespace {

std::string tok(double x) { return format17(x); }

double parse_double_token(const std::string& s, const char* what) {
  if (s == "inf") return INFINITY;
  const char* c = s.c_str();
  char* end = nullptr;
  double v = std::strtod(c, &end);
  if (end == c || *end != '\0')
    throw validation_error(std::string("bad decimal token for ") + what + ": '" + s + "'");
  return v;
}

// Accepts a decimal string (canonical) or a JSON number (normalized to %.17g).
std::pair<double, std::string> parse_number(const ordered_json& j, const char* what) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    return {parse_double_token(s, what), s};
  }
  if (j.is_number()) {
    double v = j.get<double>();
    return {v, tok(v)};
  }
  throw validation_error(std::string(what) + " must be a decimal string or number");
}

std::string interval_name(double a, double b) {
  return "[" + tok(a) + ", " + tok(b) + ")";
}

// Rebase polynomial coefficients from powers of (r-a) to powers of (r-b):
// sum_k c_k (t+s)^k with t = r-b, s = b-a.
std::vector<Eigen::MatrixXd> rebase_poly(const std::vector<Eigen::MatrixXd>& c, double s) {
  const int deg = static_cast<int>(c.size()) - 1;
  std::vector<Eigen::MatrixXd> out(c.size(),
                                   Eigen::MatrixXd::Zero(c[0].rows(), c[0].cols()));
  for (int k = 0; k <= deg; ++k) {
    double binom = 1.0, spow = 1.0;
    for (int j = k; j >= 0; --j) {
      out[j] += c[k] * (binom * spow);
      binom *= static_cast<double>(j) / static_cast<double>(k - j + 1);
      spow *= s;
    }
  }
  return out;
}

std::vector<std::vector<std::string>> retokenize(const std::vector<Eigen::MatrixXd>& c) {
  std::vector<std::vector<std::string>> toks(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    toks[k].reserve(static_cast<std::size_t>(c[k].size()));
    for (Eigen::Index i = 0; i < c[k].rows(); ++i)
      for (Eigen::Index j = 0; j < c[k].cols(); ++j) toks[k].push_back(tok(c[k](i, j)));
  }
  return toks;
}

Piece make_piece(double from, double to, PieceKind kind, std::vector<Eigen::MatrixXd> coeffs) {
  Piece p;
  p.from = from;
  p.to = to;
  p.kind = kind;
  p.coeffs = std::move(coeffs);
  p.coeff_tokens = retokenize(p.coeffs);
  p.from_token = tok(from);
  p.to_token = std::isinf(to) ? "inf" : tok(to);
  return p;
}

Piece zero_piece(double from, double to, int n) {
  return make_piece(from, to, PieceKind::constant, {Eigen::MatrixXd::Zero(n, n)});
}

double lambda_min(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 1) return std::fabs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return std::max(std::fabs(es.eigenvalues().minCoeff()),
                  std::fabs(es.eigenvalues().maxCoeff()));
}

}  // namespace

void Piece::value_into(double r, Eigen::MatrixXd& out) const {
  switch (kind) {
    case PieceKind::constant:
      out = coeffs[0];
      return;
    case PieceKind::centrifugal:
      out = coeffs[0] / (r * r);
      return;
    case PieceKind::poly: {
      const double t = r - from;
      out = coeffs.back();
      for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
        out = out * t + coeffs[k];
      return;
    }
  }
}

double Piece::value_scalar(double r) const {
  switch (kind) {
    case PieceKind::constant:
      return coeffs[0](0, 0);
    case PieceKind::centrifugal:
      return coeffs[0](0, 0) / (r * r);
    case PieceKind::poly: {
      const double t = r - from;
      double v = coeffs.back()(0, 0);
      for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
        v = v * t + coeffs[k](0, 0);
      return v;
    }
  }
  return 0.0;
}

PotentialProfile PotentialProfile::zero(int n) {
  PotentialProfile p;
  p.channel_dim = n;
  p.support_end = 1.0;
  p.support_end_token = "1";
  return p;
}

void PotentialProfile::validate() const {
  if (channel_dim < 1 || channel_dim > 8)
    throw validation_error("channel_dim must be in [1,8], got " + std::to_string(channel_dim));
  double cursor = 1.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    if (!(p.to > p.from))
      throw validation_error("piece " + interval_name(p.from, p.to) + " is empty or inverted");
    if (std::fabs(p.from - cursor) > 1e-12) {
      if (p.from > cursor)
        throw validation_error("gap between " + tok(cursor) + " and piece " +
                               interval_name(p.from, p.to));
      throw validation_error("overlap at piece " + interval_name(p.from, p.to) +
                             " (previous piece ends at " + tok(cursor) + ")");
    }
    if (p.unbounded() && i + 1 != pieces.size())
      throw validation_error("unbounded piece " + interval_name(p.from, p.to) +
                             " must be the last one");
    if (p.unbounded() && p.kind != PieceKind::centrifugal)
      throw validation_error("only centrifugal pieces may be unbounded, offending piece " +
                             interval_name(p.from, p.to));
    if (p.coeffs.empty())
      throw validation_error("piece " + interval_name(p.from, p.to) + " has no coefficients");
    if (p.kind != PieceKind::poly && p.coeffs.size() != 1)
      throw validation_error("non-poly piece " + interval_name(p.from, p.to) +
                             " must have exactly one coefficient");
    for (const auto& c : p.coeffs) {
      if (c.rows() != channel_dim || c.cols() != channel_dim)
        throw validation_error("coefficient of piece " + interval_name(p.from, p.to) +
                               " is not " + std::to_string(channel_dim) + "x" +
                               std::to_string(channel_dim));
      if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw validation_error("asymmetric coefficient in piece " +
                               interval_name(p.from, p.to));
    }
    cursor = p.to;
  }
  if (!pieces.empty()) {
    if (std::fabs(pieces.front().from - 1.0) > 1e-12)
      throw validation_error("pieces must start at r=1, first starts at " +
                             tok(pieces.front().from));
    if (std::isfinite(support_end) != std::isfinite(cursor) ||
        (std::isfinite(cursor) && std::fabs(cursor - support_end) > 1e-12))
      throw validation_error("support_end " + tok(support_end) +
                             " does not match last piece end " + tok(cursor));
  }
}

namespace {
const Piece* piece_at(const std::vector<Piece>& pieces, double r) {
  for (const Piece& p : pieces)
    if (r >= p.from && (p.unbounded() || r < p.to)) return &p;
  return nullptr;
}
}  // namespace

double PotentialProfile::value_scalar(double r) const {
  const Piece* p = piece_at(pieces, r);
  return p ? p->value_scalar(r) : 0.0;
}

void PotentialProfile::value_into(double r, Eigen::MatrixXd& out) const {
  const Piece* p = piece_at(pieces, r);
  if (p)
    p->value_into(r, out);
  else
    out.setZero(channel_dim, channel_dim);
}

Eigen::MatrixXd PotentialProfile::value_matrix(double r) const {
  Eigen::MatrixXd m(channel_dim, channel_dim);
  value_into(r, m);
  return m;
}

std::vector<double> PotentialProfile::breakpoints() const {
  std::vector<double> bp;
  bp.push_back(1.0);
  for (const Piece& p : pieces)
    if (!p.unbounded()) bp.push_back(p.to);
  return bp;
}

namespace {
constexpr double kSnap = 1e-9;
}

double PotentialProfile::sample_scalar(double r) const {
  for (const Piece& p : pieces) {
    if (!p.unbounded() && std::fabs(r - p.to) <= kSnap) {
      double left = p.value_scalar(p.to);
      const Piece* right = piece_at(pieces, p.to);
      return 0.5 * (left + (right ? right->value_scalar(p.to) : 0.0));
    }
  }
  return value_scalar(r);
}

Eigen::MatrixXd PotentialProfile::sample_matrix(double r) const {
  for (const Piece& p : pieces) {
    if (!p.unbounded() && std::fabs(r - p.to) <= kSnap) {
      Eigen::MatrixXd left(channel_dim, channel_dim), right(channel_dim, channel_dim);
      p.value_into(p.to, left);
      const Piece* rp = piece_at(pieces, p.to);
      if (rp)
        rp->value_into(p.to, right);
      else
        right.setZero();
      return 0.5 * (left + right);
    }
  }
  return value_matrix(r);
}

double PotentialProfile::entry11_integral(double lo, double hi) const {
  double total = 0.0;
  for (const Piece& p : pieces) {
    double a = std::max(lo, p.from);
    double b = p.unbounded() ? hi : std::min(hi, p.to);
    if (!(b > a)) continue;
    switch (p.kind) {
      case PieceKind::constant:
        total += p.coeffs[0](0, 0) * (b - a);
        break;
      case PieceKind::centrifugal: {
        double upper = std::isinf(b) ? 0.0 : 1.0 / b;
        total += p.coeffs[0](0, 0) * (1.0 / a - upper);
        break;
      }
      case PieceKind::poly: {
        double ta = a - p.from, tb = b - p.from;
        double pa = 0.0, pb = 0.0;
        for (int k = static_cast<int>(p.coeffs.size()) - 1; k >= 0; --k) {
          double c = p.coeffs[static_cast<std::size_t>(k)](0, 0) / (k + 1);
          pa = (pa + c) * ta;
          pb = (pb + c) * tb;
        }
        total += pb - pa;
        break;
      }
    }
  }
  return total;
}

namespace {

// Extremum scan over one piece: samples, then golden refinement of each local
// bracket. `score` maps the matrix value at r to the scalar being maximized.
template <class Score>
double piece_max(const Piece& p, int n, Score&& score) {
  const double lo = p.from;
  const double hi = p.unbounded() ? p.from + 1.0 : p.to;  // centrifugal decays
  if (p.kind != PieceKind::poly) {
    Eigen::MatrixXd m(n, n);
    p.value_into(lo, m);
    double best = score(m);
    p.value_into(hi, m);
    best = std::max(best, score(m));
    return best;
  }
  constexpr int kSamples = 128;
  Eigen::MatrixXd m(n, n);
  std::vector<double> vals(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    double r = lo + (hi - lo) * i / kSamples;
    p.value_into(r, m);
    vals[static_cast<std::size_t>(i)] = score(m);
  }
  double best = *std::max_element(vals.begin(), vals.end());
  for (int i = 1; i < kSamples; ++i) {
    if (vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1]) {
      double a = lo + (hi - lo) * (i - 1) / kSamples;
      double b = lo + (hi - lo) * (i + 1) / kSamples;
      double r = golden_min(
          [&](double x) {
            p.value_into(x, m);
            return -score(m);
          },
          a, b, 1e-12 * (hi - lo));
      p.value_into(r, m);
      best = std::max(best, score(m));
    }
  }
  return best;
}

}  // namespace

double PotentialProfile::neg_part_sup() const {
  double best = 0.0;
  for (const Piece& p : pieces)
    best = std::max(best, piece_max(p, channel_dim, [](const Eigen::MatrixXd& m) {
                      return std::max(0.0, -lambda_min(m));
                    }));
  return best;
}

double PotentialProfile::sup_norm() const {
  double best = 0.0;
  for (const Piece& p : pieces)
    best = std::max(best, piece_max(p, channel_dim, [](const Eigen::MatrixXd& m) {
                      return spectral_norm(m);
                    }));
  return best;
}

bool PotentialProfile::annihilates_e0_below_2(double tol) const {
  for (const Piece& p : pieces) {
    if (p.from >= 2.0) continue;
    for (const auto& c : p.coeffs)
      if (c.col(0).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

// ---- JSON ------------------------------------------------------------------

namespace {

PieceKind kind_from_string(const std::string& s) {
  if (s == "const") return PieceKind::constant;
  if (s == "poly") return PieceKind::poly;
  if (s == "centrifugal") return PieceKind::centrifugal;
  throw validation_error("unknown piece kind '" + s + "'");
}

std::string kind_to_string(PieceKind k) {
  switch (k) {
    case PieceKind::constant: return "const";
    case PieceKind::poly: return "poly";
    case PieceKind::centrifugal: return "centrifugal";
  }
  return "const";
}

// One coefficient: a bare token for n=1, or row-major nested arrays for n>1.
std::pair<Eigen::MatrixXd, std::vector<std::string>> parse_coeff(const ordered_json& j,
                                                                 int n) {
  std::vector<std::string> toks;
  Eigen::MatrixXd m(n, n);
  if (!j.is_array()) {
    if (n != 1)
      throw validation_error("matrix coefficient must be an array of rows");
    auto [v, t] = parse_number(j, "coefficient");
    m(0, 0) = v;
    toks.push_back(t);
    return {m, toks};
  }
  if (static_cast<int>(j.size()) != n)
    throw validation_error("coefficient has " + std::to_string(j.size()) + " rows, expected " +
                           std::to_string(n));
  for (int i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw validation_error("coefficient row " + std::to_string(i) + " must have " +
                             std::to_string(n) + " entries");
    for (int k = 0; k < n; ++k) {
      auto [v, t] = parse_number(row[static_cast<std::size_t>(k)], "coefficient");
      m(i, k) = v;
      toks.push_back(t);
    }
  }
  return {m, toks};
}

ordered_json coeff_to_json(const std::vector<std::string>& toks, int n) {
  if (n == 1) return ordered_json(toks[0]);
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < n; ++k) row.push_back(toks[static_cast<std::size_t>(i * n + k)]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

PotentialProfile PotentialProfile::from_json(const ordered_json& j) {
  PotentialProfile out;
  if (!j.is_object()) throw validation_error("potential document must be a JSON object");
  if (!j.contains("channel_dim") || !j["channel_dim"].is_number_integer())
    throw validation_error("missing integer field 'channel_dim'");
  out.channel_dim = j["channel_dim"].get<int>();
  if (!j.contains("support_end")) throw validation_error("missing field 'support_end'");
  auto [se, set] = parse_number(j["support_end"], "support_end");
  out.support_end = se;
  out.support_end_token = set;
  if (!j.contains("pieces") || !j["pieces"].is_array())
    throw validation_error("missing array field 'pieces'");
  for (const auto& pj : j["pieces"]) {
    Piece p;
    auto [fv, ft] = parse_number(pj.at("from"), "from");
    auto [tv, tt] = parse_number(pj.at("to"), "to");
    p.from = fv;
    p.from_token = ft;
    p.to = tv;
    p.to_token = tt;
    p.kind = kind_from_string(pj.at("kind").get<std::string>());
    const auto& cj = pj.at("coeffs");
    if (!cj.is_array() || cj.empty())
      throw validation_error("piece " + interval_name(p.from, p.to) +
                             ": 'coeffs' must be a nonempty array");
    // For n=1 a flat token array is one coefficient per degree; for n>1 each
    // entry is a matrix.
    for (const auto& c : cj) {
      auto [m, toks] = parse_coeff(c, out.channel_dim);
      p.coeffs.push_back(std::move(m));
      p.coeff_tokens.push_back(std::move(toks));
    }
    out.pieces.push_back(std::move(p));
  }
  out.validate();
  return out;
}

ordered_json PotentialProfile::to_json() const {
  ordered_json j;
  j["channel_dim"] = channel_dim;
  j["support_end"] = support_end_token;
  ordered_json arr = ordered_json::array();
  for (const Piece& p : pieces) {
    ordered_json pj;
    pj["from"] = p.from_token;
    pj["to"] = p.to_token;
    pj["kind"] = kind_to_string(p.kind);
    ordered_json coeffs = ordered_json::array();
    for (const auto& toks : p.coeff_tokens) coeffs.push_back(coeff_to_json(toks, channel_dim));
    pj["coeffs"] = coeffs;
    arr.push_back(pj);
  }
  j["pieces"] = arr;
  return j;
}

PotentialProfile PotentialProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open potential file '" + path + "'");
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw io_error("cannot parse potential file '" + path + "': " + e.what());
  }
  return from_json(j);
}

void PotentialProfile::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write potential file '" + path + "'");
  out << to_json().dump(2) << "\n";
}

// ---- constructors ------------------------------------------------------------

PotentialProfile scalar_step_profile(const std::vector<double>& edges,
                                     const std::vector<double>& values) {
  if (edges.size() != values.size() + 1)
    throw validation_error("step profile needs one more edge than values");
  PotentialProfile p;
  p.channel_dim = 1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    Eigen::MatrixXd c(1, 1);
    c(0, 0) = values[i];
    p.pieces.push_back(make_piece(edges[i], edges[i + 1], PieceKind::constant, {c}));
  }
  p.support_end = edges.back();
  p.support_end_token = tok(edges.back());
  p.validate();
  return p;
}

PotentialProfile scalar_well(double from, double to, double value) {
  if (from > 1.0) return scalar_step_profile({1.0, from, to}, {0.0, value});
  return scalar_step_profile({1.0, to}, {value});
}

PotentialProfile scalar_bump(double r0, double r1, double amplitude) {
  double w = r1 - r0;
  double c = amplitude * 16.0 / (w * w * w * w);
  auto mat = [](double v) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = v;
    return m;
  };
  // c t^2 (w-t)^2 = c w^2 t^2 - 2 c w t^3 + c t^4 in t = r - r0
  std::vector<Eigen::MatrixXd> coeffs{mat(0.0), mat(0.0), mat(c * w * w), mat(-2.0 * c * w),
                                      mat(c)};
  PotentialProfile p;
  p.channel_dim = 1;
  if (r0 > 1.0) p.pieces.push_back(zero_piece(1.0, r0, 1));
  p.pieces.push_back(make_piece(r0, r1, PieceKind::poly, std::move(coeffs)));
  p.support_end = r1;
  p.support_end_token = tok(r1);
  p.validate();
  return p;
}

PotentialProfile centrifugal_profile(int d, double from) {
  Eigen::MatrixXd c(1, 1);
  c(0, 0) = -0.25 * (d - 1) * (d - 3);
  PotentialProfile p;
  p.channel_dim = 1;
  if (from > 1.0) p.pieces.push_back(zero_piece(1.0, from, 1));
  p.pieces.push_back(make_piece(from, INFINITY, PieceKind::centrifugal, {c}));
  p.support_end = INFINITY;
  p.support_end_token = "inf";
  p.validate();
  return p;
}

// ---- algebra -----------------------------------------------------------------

PotentialProfile scaled(const PotentialProfile& p, double t) {
  PotentialProfile out = p;
  for (Piece& q : out.pieces) {
    for (auto& c : q.coeffs) c *= t;
    q.coeff_tokens = retokenize(q.coeffs);
  }
  return out;
}

namespace {

// Slice of one piece restricted to [a,b) as a self-contained piece with its
// own origin (poly coefficients rebased to r-a).
Piece slice_piece(const Piece& p, double a, double b) {
  Piece out = p;
  out.from = a;
  out.to = b;
  if (p.kind == PieceKind::poly && a != p.from) out.coeffs = rebase_poly(p.coeffs, a - p.from);
  out.coeff_tokens = retokenize(out.coeffs);
  out.from_token = tok(a);
  out.to_token = std::isinf(b) ? "inf" : tok(b);
  return out;
}

Piece add_pieces(const Piece* a, const Piece* b, double lo, double hi, int n) {
  if (!a && !b) return zero_piece(lo, hi, n);
  if (a && !b) return slice_piece(*a, lo, hi);
  if (!a && b) return slice_piece(*b, lo, hi);
  Piece pa = slice_piece(*a, lo, hi), pb = slice_piece(*b, lo, hi);
  bool ca = pa.kind == PieceKind::centrifugal, cb = pb.kind == PieceKind::centrifugal;
  auto is_zero = [](const Piece& p) {
    for (const auto& c : p.coeffs)
      if (c.cwiseAbs().maxCoeff() != 0.0) return false;
    return true;
  };
  if (ca != cb) {
    if (ca && is_zero(pb)) return pa;
    if (cb && is_zero(pa)) return pb;
    throw validation_error("cannot add centrifugal and non-centrifugal pieces on " +
                           interval_name(lo, hi));
  }
  if (ca && cb) {
    Piece out = pa;
    out.coeffs[0] += pb.coeffs[0];
    out.coeff_tokens = retokenize(out.coeffs);
    return out;
  }
  std::size_t deg = std::max(pa.coeffs.size(), pb.coeffs.size());
  std::vector<Eigen::MatrixXd> coeffs(deg, Eigen::MatrixXd::Zero(n, n));
  for (std::size_t k = 0; k < pa.coeffs.size(); ++k) coeffs[k] += pa.coeffs[k];
  for (std::size_t k = 0; k < pb.coeffs.size(); ++k) coeffs[k] += pb.coeffs[k];
  return make_piece(lo, hi, deg == 1 ? PieceKind::constant : PieceKind::poly,
                    std::move(coeffs));
}

const Piece* owner(const std::vector<Piece>& pieces, double lo) {
  for (const Piece& p : pieces)
    if (lo >= p.from - 1e-12 && (p.unbounded() || lo < p.to - 1e-12)) return &p;
  return nullptr;
}

}  // namespace

PotentialProfile sum(const PotentialProfile& a, const PotentialProfile& b) {
  if (a.channel_dim != b.channel_dim)
    throw validation_error("cannot add profiles with channel dims " +
                           std::to_string(a.channel_dim) + " and " +
                           std::to_string(b.channel_dim));
  const int n = a.channel_dim;
  std::vector<double> edges{1.0};
  bool unbounded = false;
  for (const auto* prof : {&a, &b}) {
    for (const Piece& p : prof->pieces) {
      edges.push_back(p.from);
      if (p.unbounded())
        unbounded = true;
      else
        edges.push_back(p.to);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double x, double y) { return std::fabs(x - y) <= 1e-12; }),
              edges.end());
  PotentialProfile out;
  out.channel_dim = n;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double lo = edges[i], hi = edges[i + 1];
    out.pieces.push_back(add_pieces(owner(a.pieces, lo), owner(b.pieces, lo), lo, hi, n));
  }
  if (unbounded) {
    double lo = edges.back();
    out.pieces.push_back(
        add_pieces(owner(a.pieces, lo), owner(b.pieces, lo), lo, INFINITY, n));
    out.support_end = INFINITY;
    out.support_end_token = "inf";
  } else {
    out.support_end = edges.empty() ? 1.0 : edges.back();
    out.support_end_token = tok(out.support_end);
  }
  if (out.pieces.empty()) return PotentialProfile::zero(n);
  out.validate();
  return out;
}

PotentialProfile zero_inside(const PotentialProfile& p, double R) {
  PotentialProfile out;
  out.channel_dim = p.channel_dim;
  if (R <= 1.0) return p;
  if (p.compact() && R >= p.support_end) return PotentialProfile::zero(p.channel_dim);
  out.pieces.push_back(zero_piece(1.0, R, p.channel_dim));
  for (const Piece& q : p.pieces) {
    if (!q.unbounded() && q.to <= R + 1e-12) continue;
    double lo = std::max(q.from, R);
    out.pieces.push_back(slice_piece(q, lo, q.to));
  }
  out.support_end = p.support_end;
  out.support_end_token = p.support_end_token;
  out.validate();
  return out;
}

PotentialProfile zero_outside(const PotentialProfile& p, double R) {
  PotentialProfile out;
  out.channel_dim = p.channel_dim;
  for (const Piece& q : p.pieces) {
    if (q.from >= R - 1e-12) break;
    double hi = q.unbounded() ? R : std::min(q.to, R);
    out.pieces.push_back(slice_piece(q, q.from, hi));
  }
  if (out.pieces.empty()) return PotentialProfile::zero(p.channel_dim);
  out.support_end = out.pieces.back().to;
  out.support_end_token = tok(out.support_end);
  out.validate();
  return out;
}

PotentialProfile faded(const PotentialProfile& p, double x0, double x1) {
  if (!(x1 > x0)) throw validation_error("fade window must have x1 > x0");
  const int n = p.channel_dim;
  const double w = x1 - x0;
  // theta(r) = 1 - 3 s^2 + 2 s^3, s = (r - x0)/w, as a cubic in t = r - x0.
  const double th0 = 1.0, th2 = -3.0 / (w * w), th3 = 2.0 / (w * w * w);
  PotentialProfile out;
  out.channel_dim = n;
  for (const Piece& q : p.pieces) {
    if (q.from >= x1 - 1e-12) break;
    if (!q.unbounded() && q.to <= x0 + 1e-12) {
      out.pieces.push_back(q);
      continue;
    }
    // piece meets the fade window: keep [from, x0) verbatim, multiply
    // [max(from,x0), min(to,x1)) by theta.
    if (q.from < x0 - 1e-12) out.pieces.push_back(slice_piece(q, q.from, x0));
    double lo = std::max(q.from, x0);
    double hi = q.unbounded() ? x1 : std::min(q.to, x1);
    if (!(hi > lo + 1e-12)) continue;
    if (q.kind == PieceKind::centrifugal)
      throw validation_error("cannot fade centrifugal piece " +
                             interval_name(q.from, q.to));
    Piece base = slice_piece(q, lo, hi);
    // theta rebased to t' = r - lo: substitute t = t' + (lo - x0).
    std::vector<Eigen::MatrixXd> theta{Eigen::MatrixXd::Constant(1, 1, th0),
                                       Eigen::MatrixXd::Zero(1, 1),
                                       Eigen::MatrixXd::Constant(1, 1, th2),
                                       Eigen::MatrixXd::Constant(1, 1, th3)};
    auto theta_re = rebase_poly(theta, lo - x0);
    std::vector<Eigen::MatrixXd> prod(base.coeffs.size() + 3, Eigen::MatrixXd::Zero(n, n));
    for (std::size_t i = 0; i < base.coeffs.size(); ++i)
      for (std::size_t j = 0; j < theta_re.size(); ++j)
        prod[i + j] += base.coeffs[i] * theta_re[j](0, 0);
    out.pieces.push_back(make_piece(lo, hi, PieceKind::poly, std::move(prod)));
  }
  if (out.pieces.empty()) return PotentialProfile::zero(n);
  out.support_end = out.pieces.back().to;
  out.support_end_token = tok(out.support_end);
  out.validate();
  return out;
}

PotentialProfile negative_part(const PotentialProfile& p) {
  if (!p.scalar())
    throw validation_error("negative_part is defined for scalar profiles only");
  PotentialProfile out;
  out.channel_dim = 1;
  for (const Piece& q : p.pieces) {
    if (q.kind == PieceKind::centrifugal) {
      double c = q.coeffs[0](0, 0);
      if (c < 0.0) {
        Piece neg = q;
        neg.coeffs[0](0, 0) = -c;
        neg.coeff_tokens = retokenize(neg.coeffs);
        out.pieces.push_back(neg);
      } else {
        out.pieces.push_back(zero_piece(q.from, q.to, 1));
      }
      continue;
    }
    if (q.kind == PieceKind::constant) {
      double c = q.coeffs[0](0, 0);
      out.pieces.push_back(c < 0.0 ? make_piece(q.from, q.to, PieceKind::constant,
                                                {Eigen::MatrixXd::Constant(1, 1, -c)})
                                   : zero_piece(q.from, q.to, 1));
      continue;
    }
    // poly: split at sign changes found by dense sampling + bisection
    constexpr int kSamples = 256;
    std::vector<double> cuts{q.from};
    double prev = q.value_scalar(q.from);
    for (int i = 1; i <= kSamples; ++i) {
      double r = q.from + (q.to - q.from) * i / kSamples;
      double v = q.value_scalar(r);
      if ((prev < 0.0) != (v < 0.0)) {
        double root = bisect_root([&](double x) { return q.value_scalar(x); },
                                  q.from + (q.to - q.from) * (i - 1) / kSamples, r, 1e-14);
        cuts.push_back(root);
      }
      prev = v;
    }
    cuts.push_back(q.to);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] < 1e-12) continue;
      double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      if (q.value_scalar(mid) < 0.0) {
        Piece s = slice_piece(q, cuts[i], cuts[i + 1]);
        for (auto& c : s.coeffs) c = -c;
        s.coeff_tokens = retokenize(s.coeffs);
        out.pieces.push_back(s);
      } else {
        out.pieces.push_back(zero_piece(cuts[i], cuts[i + 1], 1));
      }
    }
  }
  if (out.pieces.empty()) return PotentialProfile::zero(1);
  // sliver cuts can leave ends microscopically off; re-stitch exactly
  for (std::size_t i = 0; i + 1 < out.pieces.size(); ++i) {
    out.pieces[i + 1].from = out.pieces[i].to;
    out.pieces[i + 1].from_token = out.pieces[i].to_token;
  }
  out.support_end = out.pieces.back().to;
  out.support_end_token = tok(out.support_end);
  out.validate();
  return out;
}

}  // namespace halflab

#include "frog/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace frog {

// ------------------------------------------------------------ EtaDistribution

EtaDistribution EtaDistribution::constant(std::int64_t k) {
  EtaDistribution e;
  e.kind = Kind::kConstant;
  e.k = k;
  return e;
}
EtaDistribution EtaDistribution::bernoulli(double q) {
  EtaDistribution e;
  e.kind = Kind::kBernoulli;
  e.q = q;
  return e;
}
EtaDistribution EtaDistribution::poisson(double lambda) {
  EtaDistribution e;
  e.kind = Kind::kPoisson;
  e.lambda = lambda;
  return e;
}
EtaDistribution EtaDistribution::geometric(double q) {
  EtaDistribution e;
  e.kind = Kind::kGeometric;
  e.q = q;
  return e;
}
EtaDistribution EtaDistribution::zeta(double s) {
  EtaDistribution e;
  e.kind = Kind::kZeta;
  e.s = s;
  return e;
}

void EtaDistribution::validate() const {
  switch (kind) {
    case Kind::kConstant:
      if (k < 0) throw ValidationError("eta: constant k must be >= 0");
      break;
    case Kind::kBernoulli:
      if (!(q >= 0 && q <= 1)) throw ValidationError("eta: bernoulli q must lie in [0,1]");
      break;
    case Kind::kPoisson:
      if (!(lambda > 0) || !std::isfinite(lambda)) throw ValidationError("eta: poisson lambda must be > 0");
      break;
    case Kind::kGeometric:
      if (!(q > 0 && q <= 1)) throw ValidationError("eta: geometric q must lie in (0,1]");
      break;
    case Kind::kZeta:
      if (!(s > 1) || !std::isfinite(s)) throw ValidationError("eta: zeta s must be > 1");
      break;
  }
}

namespace {

constexpr std::int64_t kZetaCutoff = 1000;

// sum_{m >= k} m^-s for k >= kZetaCutoff (Euler-Maclaurin, three terms).
double hurwitz_tail(double s, double k) {
  return std::pow(k, 1 - s) / (s - 1) + 0.5 * std::pow(k, -s) + s / 12 * std::pow(k, -s - 1);
}

double zeta_total(double s) {
  double sum = 0;
  for (std::int64_t m = kZetaCutoff - 1; m >= 1; --m) sum += std::pow(static_cast<double>(m), -s);
  return sum + hurwitz_tail(s, kZetaCutoff);
}

}  // namespace

double zeta_tail(double s, std::int64_t k) {
  if (k <= 1) return 1.0;
  const double z = zeta_total(s);
  if (k >= kZetaCutoff) return hurwitz_tail(s, static_cast<double>(k)) / z;
  double head = 0;
  for (std::int64_t m = k - 1; m >= 1; --m) head += std::pow(static_cast<double>(m), -s);
  return 1.0 - head / z;
}

std::int64_t EtaDistribution::quantile(double u) const {
  switch (kind) {
    case Kind::kConstant:
      return k;
    case Kind::kBernoulli:
      return u < q ? 1 : 0;
    case Kind::kPoisson: {
      double pmf = std::exp(-lambda);
      double cdf = pmf;
      std::int64_t n = 0;
      while (u >= cdf && n < 100000) {
        ++n;
        pmf *= lambda / static_cast<double>(n);
        const double next = cdf + pmf;
        if (next == cdf && pmf < 1e-300) break;
        cdf = next;
      }
      return n;
    }
    case Kind::kGeometric: {
      if (q >= 1) return 0;
      // Smallest k with 1 - (1-q)^(k+1) > u.
      const double v = std::floor(std::log1p(-u) / std::log1p(-q));
      return v >= 9.0e18 ? std::int64_t{9000000000000000000} : static_cast<std::int64_t>(v);
    }
    case Kind::kZeta: {
      const double z = zeta_total(s);
      double cdf = 0;
      for (std::int64_t m = 1; m < kZetaCutoff; ++m) {
        cdf += std::pow(static_cast<double>(m), -s) / z;
        if (u < cdf) return m;
      }
      // Tail: find the smallest m >= cutoff with P(eta > m) <= 1 - u.
      const double target = 1 - u;
      std::int64_t lo = kZetaCutoff - 1;  // P(eta > lo) > target
      std::int64_t hi = kZetaCutoff;
      while (hurwitz_tail(s, static_cast<double>(hi + 1)) / z > target) {
        lo = hi;
        if (hi > (std::int64_t{1} << 61)) return hi;
        hi *= 2;
      }
      while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (hurwitz_tail(s, static_cast<double>(mid + 1)) / z > target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return hi;
    }
  }
  return 0;
}

std::int64_t sample_eta(const RandomSource& f, const EtaDistribution& eta, const Site& x) {
  return eta.quantile(f.uniform(RandomKey{StreamTag::kEta, x, 0, 0, 0}));
}

// -------------------------------------------------------------- InitialConfig

namespace {

SiteSet sites_with(const InitialConfig& cfg, int d, auto pred) {
  std::vector<Site> out;
  for (const auto& e : cfg.entries) {
    if (pred(e.tag)) out.push_back(e.site);
  }
  return SiteSet(d, std::move(out));
}

}  // namespace

SiteSet InitialConfig::set_a(int d) const {
  return sites_with(*this, d, [](InitTag t) { return t == InitTag::kOne; });
}
SiteSet InitialConfig::set_b(int d) const {
  return sites_with(*this, d, [](InitTag t) { return t == InitTag::kTwo; });
}
SiteSet InitialConfig::initial_sites(int d) const {
  return sites_with(*this, d, [](InitTag t) { return t != InitTag::kNone; });
}

std::optional<std::int64_t> InitialConfig::fixed_count(const Site& x) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), x,
                             [](const InitEntry& e, const Site& s) { return e.site < s; });
  if (it != entries.end() && it->site == x) return it->count;
  return std::nullopt;
}

InitialConfig single_site_config(const Site& x, std::int64_t count, InitTag tag) {
  InitialConfig cfg;
  cfg.entries.push_back({x, count, tag});
  return cfg;
}

void add_box(InitialConfig& cfg, const Site& center, std::int32_t half, std::int64_t count, InitTag tag) {
  for (const auto& x : box(center, half)) cfg.entries.push_back({x, count, tag});
  normalize(cfg);
}

void normalize(InitialConfig& cfg) {
  std::stable_sort(cfg.entries.begin(), cfg.entries.end(),
                   [](const InitEntry& a, const InitEntry& b) { return a.site < b.site; });
}

// ------------------------------------------------------------------ Scenario

void Scenario::validate() const {
  if (dimension < 1 || dimension > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3");
  if (!(p1 > 0 && p1 <= 1)) throw ValidationError("p1 must lie in (0,1]");
  if (mode == Mode::kTwoType) {
    if (!p2) throw ValidationError("two_type mode requires p2");
    if (!(*p2 > 0 && *p2 <= 1)) throw ValidationError("p2 must lie in (0,1]");
  }
  eta.validate();
  if (horizon < 1) throw ValidationError("horizon must be >= 1");

  bool has_a = false;
  bool has_b = false;
  for (std::size_t i = 0; i < init.entries.size(); ++i) {
    const auto& e = init.entries[i];
    if (e.site.dim != dimension) throw ValidationError("init site dimension does not match scenario");
    if (e.count < 1) throw ValidationError("init counts must be >= 1");
    if (i > 0 && init.entries[i - 1].site == e.site) {
      const bool one_two = (init.entries[i - 1].tag == InitTag::kOne && e.tag == InitTag::kTwo) ||
                           (init.entries[i - 1].tag == InitTag::kTwo && e.tag == InitTag::kOne);
      throw ValidationError(one_two ? "initial sets A and B overlap" : "duplicate init site");
    }
    if (i > 0 && init.entries[i - 1].site > e.site) throw ValidationError("init entries not sorted");
    has_a |= e.tag == InitTag::kOne;
    has_b |= e.tag == InitTag::kTwo;
  }
  if (!has_a) throw ValidationError("initial set A is empty");
  if (mode == Mode::kOneType && has_b) throw ValidationError("one_type mode admits no type-two sites");
  if (mode == Mode::kTwoType && !has_b) throw ValidationError("two_type mode requires a non-empty B");
}

std::string_view to_string(Mode m) { return m == Mode::kOneType ? "one_type" : "two_type"; }

std::string_view to_string(TieRule r) {
  switch (r) {
    case TieRule::kType1Wins: return "type1_wins";
    case TieRule::kType2Wins: return "type2_wins";
    case TieRule::kCoinFlip: return "coin_flip";
    case TieRule::kParity: return "parity";
  }
  return "?";
}

std::string_view to_string(EtaDistribution::Kind k) {
  using K = EtaDistribution::Kind;
  switch (k) {
    case K::kConstant: return "constant";
    case K::kBernoulli: return "bernoulli";
    case K::kPoisson: return "poisson";
    case K::kGeometric: return "geometric";
    case K::kZeta: return "zeta";
  }
  return "?";
}

std::string_view to_string(InitTag t) {
  switch (t) {
    case InitTag::kOne: return "one";
    case InitTag::kTwo: return "two";
    case InitTag::kNone: return "none";
  }
  return "?";
}

// ------------------------------------------------------------------- parsing

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(std::string_view v, int line) {
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail(line, "expected integer, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_uint(std::string_view v, int line) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail(line, "expected unsigned integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_real(std::string_view v, int line) {
  if (v.find_first_of(".eE") == std::string_view::npos) {
    fail(line, "real values need a decimal point, got '" + std::string(v) + "'");
  }
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail(line, "expected real, got '" + std::string(v) + "'");
  return out;
}

Site parse_site(std::string_view v, int line) {
  std::vector<std::int32_t> coords;
  while (true) {
    const auto comma = v.find(',');
    const auto part = trim(v.substr(0, comma));
    const auto value = parse_int(part, line);
    if (value < INT32_MIN || value > INT32_MAX) fail(line, "site coordinate out of range");
    coords.push_back(static_cast<std::int32_t>(value));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (coords.empty() || coords.size() > kMaxDim) fail(line, "sites need 1 to 3 coordinates");
  Site s = Site::origin(static_cast<int>(coords.size()));
  for (std::size_t i = 0; i < coords.size(); ++i) s[static_cast<int>(i)] = coords[i];
  return s;
}

std::string format_real(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, p);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_site(const Site& x) {
  std::string s;
  for (int i = 0; i < x.dim; ++i) {
    if (i) s += ',';
    s += std::to_string(x[i]);
  }
  return s;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  std::string section;
  std::map<std::string, std::pair<std::string, int>> model, eta, run;
  bool saw_dimension = false;
  bool saw_mode = false;
  int line_no = 0;

  std::istringstream in{std::string(text)};
  std::string raw;
  struct RawInit {
    Site site;
    std::int64_t count;
    std::optional<InitTag> tag;
    int line;
  };
  std::vector<RawInit> raw_init;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "eta" && section != "init" && section != "run") {
        fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = std::string(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) fail(line_no, "empty key or value");

    if (section.empty()) fail(line_no, "entry outside of a section");
    if (section == "init") {
      RawInit r{parse_site(key, line_no), 0, std::nullopt, line_no};
      std::istringstream vs(value);
      std::string count_s, tag_s, extra;
      vs >> count_s >> tag_s >> extra;
      if (!extra.empty()) fail(line_no, "init entries are '<site> = <count> [one|two|none]'");
      r.count = parse_int(count_s, line_no);
      if (!tag_s.empty()) {
        if (tag_s == "one") r.tag = InitTag::kOne;
        else if (tag_s == "two") r.tag = InitTag::kTwo;
        else if (tag_s == "none") r.tag = InitTag::kNone;
        else fail(line_no, "unknown init type '" + tag_s + "'");
      }
      raw_init.push_back(r);
      continue;
    }
    auto& target = section == "model" ? model : section == "eta" ? eta : run;
    const auto canonical = (section == "model" && key == "p") ? std::string("p1") : key;
    if (target.count(canonical)) fail(line_no, "duplicate key '" + key + "'");
    target[canonical] = {value, line_no};
  }

  auto take = [](auto& m, const std::string& k) -> std::optional<std::pair<std::string, int>> {
    auto it = m.find(k);
    if (it == m.end()) return std::nullopt;
    auto v = it->second;
    m.erase(it);
    return v;
  };

  if (auto v = take(model, "dimension")) {
    sc.dimension = static_cast<int>(parse_int(v->first, v->second));
    saw_dimension = true;
  }
  if (auto v = take(model, "mode")) {
    saw_mode = true;
    if (v->first == "one_type") sc.mode = Mode::kOneType;
    else if (v->first == "two_type") sc.mode = Mode::kTwoType;
    else fail(v->second, "unknown mode '" + v->first + "'");
  }
  if (auto v = take(model, "p1")) sc.p1 = parse_real(v->first, v->second);
  else throw ParseError("[model] p1 (or p) is required");
  if (auto v = take(model, "p2")) sc.p2 = parse_real(v->first, v->second);
  if (auto v = take(model, "tie_rule")) {
    if (v->first == "type1_wins") sc.tie_rule = TieRule::kType1Wins;
    else if (v->first == "type2_wins") sc.tie_rule = TieRule::kType2Wins;
    else if (v->first == "coin_flip") sc.tie_rule = TieRule::kCoinFlip;
    else if (v->first == "parity") sc.tie_rule = TieRule::kParity;
    else fail(v->second, "unknown tie_rule '" + v->first + "'");
  }
  if (!model.empty()) fail(model.begin()->second.second, "unknown [model] key '" + model.begin()->first + "'");
  if (!saw_dimension) throw ParseError("[model] dimension is required");
  if (!saw_mode) throw ParseError("[model] mode is required");

  auto kind = take(eta, "kind");
  if (!kind) throw ParseError("[eta] kind is required");
  auto need = [&](const std::string& k) {
    auto v = take(eta, k);
    if (!v) throw ParseError("[eta] " + kind->first + " requires '" + k + "'");
    return *v;
  };
  if (kind->first == "constant") {
    auto v = need("k");
    sc.eta = EtaDistribution::constant(parse_int(v.first, v.second));
  } else if (kind->first == "bernoulli") {
    auto v = need("q");
    sc.eta = EtaDistribution::bernoulli(parse_real(v.first, v.second));
  } else if (kind->first == "poisson") {
    auto v = need("lambda");
    sc.eta = EtaDistribution::poisson(parse_real(v.first, v.second));
  } else if (kind->first == "geometric") {
    auto v = need("q");
    sc.eta = EtaDistribution::geometric(parse_real(v.first, v.second));
  } else if (kind->first == "zeta") {
    auto v = need("s");
    sc.eta = EtaDistribution::zeta(parse_real(v.first, v.second));
  } else {
    fail(kind->second, "unknown eta kind '" + kind->first + "'");
  }
  if (!eta.empty()) fail(eta.begin()->second.second, "unknown [eta] key '" + eta.begin()->first + "'");

  if (auto v = take(run, "horizon")) sc.horizon = parse_int(v->first, v->second);
  else throw ParseError("[run] horizon is required");
  if (auto v = take(run, "seed")) sc.seed = parse_uint(v->first, v->second);
  else throw ParseError("[run] seed is required");
  if (!run.empty()) fail(run.begin()->second.second, "unknown [run] key '" + run.begin()->first + "'");

  for (const auto& r : raw_init) {
    InitTag tag = InitTag::kOne;
    if (r.tag) tag = *r.tag;
    else if (sc.mode == Mode::kTwoType) fail(r.line, "two_type init entries need an explicit type");
    sc.init.entries.push_back({r.site, r.count, tag});
  }
  normalize(sc.init);
  sc.validate();
  return sc;
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[model]\n";
  out << "dimension = " << s.dimension << "\n";
  out << "mode = " << to_string(s.mode) << "\n";
  out << "p1 = " << format_real(s.p1) << "\n";
  if (s.p2) out << "p2 = " << format_real(*s.p2) << "\n";
  out << "tie_rule = " << to_string(s.tie_rule) << "\n";
  out << "\n[eta]\n";
  out << "kind = " << to_string(s.eta.kind) << "\n";
  using K = EtaDistribution::Kind;
  switch (s.eta.kind) {
    case K::kConstant: out << "k = " << s.eta.k << "\n"; break;
    case K::kBernoulli:
    case K::kGeometric: out << "q = " << format_real(s.eta.q) << "\n"; break;
    case K::kPoisson: out << "lambda = " << format_real(s.eta.lambda) << "\n"; break;
    case K::kZeta: out << "s = " << format_real(s.eta.s) << "\n"; break;
  }
  out << "\n[init]\n";
  for (const auto& e : s.init.entries) {
    out << format_site(e.site) << " = " << e.count << " " << to_string(e.tag) << "\n";
  }
  out << "\n[run]\n";
  out << "horizon = " << s.horizon << "\n";
  out << "seed = " << s.seed << "\n";
  return out.str();
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace frog

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "decoy/decoy.h"

namespace decoycli {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Anything the user can fix by editing the command line or the config.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ojson num_or_inf(double v) { return std::isinf(v) ? ojson("inf") : ojson(v); }

void check(decoy_status status) {
  if (status != DECOY_OK)
    throw ConfigError(std::string(decoy_status_string(status)) + ": " + decoy_last_error());
}

struct ProfileDeleter {
  void operator()(decoy_profile* p) const { decoy_profile_destroy(p); }
};
struct ChannelDeleter {
  void operator()(decoy_channel* c) const { decoy_channel_destroy(c); }
};
struct StudyDeleter {
  void operator()(decoy_baseline_study* s) const { decoy_baseline_study_destroy(s); }
};
using ProfilePtr = std::unique_ptr<decoy_profile, ProfileDeleter>;
using ChannelPtr = std::unique_ptr<decoy_channel, ChannelDeleter>;
using StudyPtr = std::unique_ptr<decoy_baseline_study, StudyDeleter>;

// ---------------------------------------------------------------------------
// Config documents

int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

class Source {
 public:
  Source(std::string text, std::string name) : text_(std::move(text)), name_(std::move(name)) {}

  const std::string& text() const { return text_; }

  // Line of the last key in `path` that can be found, searching each key
  // after its parent.
  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0, found = std::string::npos;
    for (const auto& key : path) {
      const std::string quoted = "\"" + key + "\"";
      std::size_t at = pos;
      for (;;) {
        at = text_.find(quoted, at);
        if (at == std::string::npos) break;
        std::size_t after = at + quoted.size();
        while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
        if (after < text_.size() && text_[after] == ':') break;
        at += quoted.size();
      }
      if (at == std::string::npos) break;
      found = pos = at;
    }
    return found == std::string::npos ? 1 : line_at(text_, found);
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string where;
    for (const auto& k : path) where += (where.empty() ? "" : ".") + k;
    throw ConfigError(name_ + ":" + std::to_string(line_of(path)) + ": " + (where.empty() ? "" : where + ": ") +
                      msg);
  }

 private:
  std::string text_;
  std::string name_;
};

struct Node {
  const json& value;
  std::vector<std::string> path;
  const Source& src;

  [[noreturn]] void fail(const std::string& msg) const { src.fail(path, msg); }

  std::optional<Node> get(const std::string& key) const {
    auto it = value.find(key);
    if (it == value.end()) return std::nullopt;
    auto p = path;
    p.push_back(key);
    return Node{*it, std::move(p), src};
  }

  void only(std::initializer_list<const char*> keys) const {
    if (!value.is_object()) fail("expected an object");
    for (auto it = value.begin(); it != value.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        auto p = path;
        p.push_back(it.key());
        src.fail(p, "unknown key");
      }
    }
  }

  double number(bool allow_inf = false) const {
    if (value.is_string() && allow_inf && value.get<std::string>() == "inf") return kInf;
    if (!value.is_number()) fail(allow_inf ? "expected a number or \"inf\"" : "expected a number");
    return value.get<double>();
  }

  std::uint64_t count() const {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_float()) {
      const double d = value.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail("expected a non-negative integer");
  }

  int integer() const {
    if (!value.is_number_integer()) fail("expected an integer");
    const auto v = value.get<std::int64_t>();
    if (v < -1000000000 || v > 1000000000) fail("integer out of range");
    return static_cast<int>(v);
  }

  std::string text() const {
    if (!value.is_string()) fail("expected a string");
    return value.get<std::string>();
  }

  std::vector<Node> items() const {
    if (!value.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
      auto p = path;
      p.push_back("[" + std::to_string(i) + "]");
      out.push_back(Node{value[i], std::move(p), src});
    }
    return out;
  }

  std::vector<double> numbers(bool allow_inf = false) const {
    std::vector<double> out;
    for (const auto& n : items()) out.push_back(n.number(allow_inf));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Resolved configurations

struct ProtocolCfg {
  double s_x = 1e9;  // infinity selects the asymptotic rate
  double eps_cor = 1e-15;
  double kappa = 1e-15;
  std::string chi = "general";
  std::string bounds = "generalized";

  void read(const Node& n, bool with_s_x) {
    if (with_s_x)
      n.only({"s_x", "eps_cor", "kappa", "chi", "bounds"});
    else
      n.only({"eps_cor", "kappa", "chi", "bounds"});
    if (auto v = n.get("s_x")) s_x = v->number(true);
    if (auto v = n.get("eps_cor")) eps_cor = v->number();
    if (auto v = n.get("kappa")) kappa = v->number();
    if (auto v = n.get("chi")) {
      chi = v->text();
      if (chi != "general" && chi != "lim") v->fail("expected \"general\" or \"lim\"");
    }
    if (auto v = n.get("bounds")) {
      bounds = v->text();
      if (bounds != "generalized" && bounds != "baseline") v->fail("expected \"generalized\" or \"baseline\"");
    }
  }

  ojson to_json(bool with_s_x) const {
    ojson j;
    if (with_s_x) j["s_x"] = num_or_inf(s_x);
    j["eps_cor"] = eps_cor;
    j["kappa"] = kappa;
    j["chi"] = chi;
    j["bounds"] = bounds;
    return j;
  }

  decoy_protocol to_c(double raw_length) const {
    decoy_protocol p;
    decoy_protocol_defaults(&p);
    p.s_x = std::isinf(raw_length) ? 1e9 : raw_length;
    p.mode = std::isinf(raw_length) ? DECOY_MODE_ASYMPTOTIC : DECOY_MODE_FINITE;
    p.eps_cor = eps_cor;
    p.kappa = kappa;
    p.chi_policy = chi == "lim" ? DECOY_CHI_LIM : DECOY_CHI_GENERAL;
    p.bound_method = bounds == "baseline" ? DECOY_BOUNDS_BASELINE : DECOY_BOUNDS_GENERALIZED;
    return p;
  }
};

struct FiberCfg {
  decoy_fiber value;
  FiberCfg() { decoy_fiber_defaults(&value); }

  void read(const Node& n) {
    n.only({"p_ap", "p_dc", "e_mis", "eta_ch", "eta_sys"});
    if (auto v = n.get("p_ap")) value.p_ap = v->number();
    if (auto v = n.get("p_dc")) value.p_dc = v->number();
    if (auto v = n.get("e_mis")) value.e_mis = v->number();
    if (auto v = n.get("eta_ch")) value.eta_ch = v->number();
    if (auto v = n.get("eta_sys")) value.eta_sys = v->number();
  }

  ojson to_json() const {
    return ojson{{"p_ap", value.p_ap},
                 {"p_dc", value.p_dc},
                 {"e_mis", value.e_mis},
                 {"eta_ch", value.eta_ch},
                 {"eta_sys", value.eta_sys}};
  }
};

struct ProfileCfg {
  std::string reference;  // one of A-H, or empty for explicit values
  std::string label;
  std::vector<double> intensities;
  std::vector<double> probabilities;
  double p_x = 0.5;

  // `with_p_x` is false for table entries, whose p_X comes from the panel.
  static ProfileCfg read(const Node& n, bool with_p_x) {
    if (with_p_x)
      n.only({"case", "label", "intensities", "probabilities", "p_x"});
    else
      n.only({"case", "label", "intensities", "probabilities"});
    ProfileCfg out;
    if (auto v = n.get("case")) {
      out.reference = v->text();
      if (out.reference.size() != 1 || out.reference[0] < 'A' || out.reference[0] > 'H')
        v->fail("expected a case label A-H");
      if (n.get("intensities") || n.get("probabilities")) n.fail("give either \"case\" or explicit values");
      out.label = out.reference;
    } else {
      auto mu = n.get("intensities");
      auto pr = n.get("probabilities");
      if (!mu || !pr) n.fail("needs \"case\" or both \"intensities\" and \"probabilities\"");
      out.intensities = mu->numbers();
      out.probabilities = pr->numbers();
      if (out.intensities.size() != out.probabilities.size())
        pr->fail("must have one entry per intensity");
      out.label = "custom";
    }
    if (auto v = n.get("label")) out.label = v->text();
    if (with_p_x) {
      auto v = n.get("p_x");
      if (!v) n.fail("missing key \"p_x\"");
      out.p_x = v->number();
    }
    return out;
  }

  ojson to_json(bool with_p_x) const {
    ojson j;
    if (!reference.empty()) {
      j["case"] = reference;
      if (label != reference) j["label"] = label;
    } else {
      j["label"] = label;
      j["intensities"] = intensities;
      j["probabilities"] = probabilities;
    }
    if (with_p_x) j["p_x"] = p_x;
    return j;
  }

  ProfilePtr make(double panel_p_x) const {
    decoy_profile* p = nullptr;
    if (!reference.empty())
      check(decoy_profile_reference(reference[0], panel_p_x, &p));
    else
      check(decoy_profile_create(intensities.data(), probabilities.data(), intensities.size(), panel_p_x, &p));
    return ProfilePtr(p);
  }
};

ojson profile_json(const decoy_profile* p) {
  const std::size_t k = decoy_profile_size(p);
  std::vector<double> mu(k), pr(k);
  double p_x = 0;
  check(decoy_profile_get(p, mu.data(), pr.data(), &p_x));
  return ojson{{"intensities", mu}, {"probabilities", pr}, {"p_x", p_x}};
}

ojson report_json(const decoy_rate_report& r) {
  ojson b{{"y_x0_lower", r.bounds.y_x0_lower},
          {"y_x1_lower", r.bounds.y_x1_lower},
          {"y_z0_lower", r.bounds.y_z0_lower},
          {"y_z1_lower", r.bounds.y_z1_lower},
          {"y1e1_z_upper", r.bounds.y1e1_z_upper},
          {"e_z1_upper", r.bounds.e_z1_upper},
          {"e_p_upper", r.bounds.e_p_defined ? ojson(r.bounds.e_p_upper) : ojson(nullptr)}};
  return ojson{{"rate", r.rate},
               {"eps_sec", r.eps_sec},
               {"final_length", num_or_inf(r.final_length)},
               {"converged", r.converged != 0},
               {"ill_defined", r.ill_defined != 0},
               {"iterations", r.iterations},
               {"bounds", b}};
}

// ---------------------------------------------------------------------------
// Command line

struct Flags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  unsigned threads = 1;
  std::string output;
};

// Reads the config file. A report written by the same command is accepted and
// its "config" member used.
std::optional<std::pair<Source, json>> load(const Flags& f) {
  if (f.config.empty()) return std::nullopt;
  std::ifstream in(f.config, std::ios::binary);
  if (!in) throw ConfigError(f.config + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  Source src(ss.str(), f.config);
  json doc;
  try {
    doc = json::parse(src.text());
  } catch (const json::parse_error& e) {
    throw ConfigError(f.config + ":" + std::to_string(line_at(src.text(), e.byte > 0 ? e.byte - 1 : 0)) +
                      ": malformed JSON (" + e.what() + ")");
  }
  if (!doc.is_object()) throw ConfigError(f.config + ":1: expected an object");
  return std::make_pair(std::move(src), std::move(doc));
}

Node config_root(const Source& src, const json& doc, const std::string& command) {
  Node root{doc, {}, src};
  if (doc.contains("command")) {
    root.only({"command", "config", "result"});
    auto c = root.get("command");
    if (c->text() != command) c->fail("report belongs to command \"" + c->text() + "\"");
    auto cfg = root.get("config");
    if (!cfg) root.fail("report has no \"config\"");
    return *cfg;
  }
  return root;
}

bool has_preset(const Flags& f) {
  if (f.preset.empty()) return false;
  if (f.preset != "paper-defaults") throw ConfigError("unknown preset \"" + f.preset + "\"");
  return true;
}

void emit(const Flags& f, std::ostream& out, const std::string& text) {
  if (f.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(f.output, std::ios::binary);
  if (!file) throw ConfigError(f.output + ": cannot open for writing");
  file << text;
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

// ---- rate -----------------------------------------------------------------

int cmd_rate(const Flags& f, std::ostream& out) {
  std::optional<ProfileCfg> profile;
  FiberCfg fiber;
  std::optional<json> truth;
  ProtocolCfg protocol;
  if (has_preset(f)) {
    // The k = 3 optimum on the default fiber link.
    ProfileCfg p;
    p.label = "optimized-k3";
    p.intensities = {0.196, 0.102, 1e-6};
    p.probabilities = {0.606, 0.272, 0.122};
    p.p_x = 0.907;
    profile = p;
  }
  auto loaded = load(f);
  if (loaded) {
    Node root = config_root(loaded->first, loaded->second, "rate");
    root.only({"profile", "channel", "protocol"});
    if (auto v = root.get("profile")) profile = ProfileCfg::read(*v, true);
    if (auto v = root.get("channel")) {
      v->only({"fiber", "truth"});
      if (v->get("fiber") && v->get("truth")) v->fail("give either \"fiber\" or \"truth\"");
      if (auto fb = v->get("fiber")) fiber.read(*fb);
      if (auto t = v->get("truth")) {
        if (!t->value.is_object()) t->fail("expected an object");
        truth = t->value;
      }
    }
    if (auto v = root.get("protocol")) protocol.read(*v, true);
  }
  if (!profile) throw ConfigError("rate: no profile given (use --config or --preset paper-defaults)");

  ProfilePtr p = profile->make(profile->p_x);
  const decoy_protocol proto = protocol.to_c(protocol.s_x);
  decoy_rate_report report{};
  ojson channel_json;
  if (truth) {
    decoy_channel* c = nullptr;
    check(decoy_channel_parse(truth->dump().c_str(), &c));
    ChannelPtr channel(c);
    check(decoy_rate_channel(p.get(), channel.get(), &proto, &report));
    channel_json["truth"] = ojson::parse(truth->dump());
  } else {
    check(decoy_rate_fiber(p.get(), &fiber.value, &proto, &report));
    channel_json["fiber"] = fiber.to_json();
  }

  ojson doc;
  doc["command"] = "rate";
  doc["config"] = ojson{{"profile", profile->to_json(true)}, {"channel", channel_json},
                        {"protocol", protocol.to_json(true)}};
  doc["result"] = report_json(report);
  emit(f, out, dump(doc));
  return report.ill_defined ? kIllDefined : kOk;
}

// ---- table ----------------------------------------------------------------

struct TableCfg {
  std::vector<ProfileCfg> profiles;
  std::optional<double> p_x;
  std::vector<double> y_max;
  double e_max = 0.01;
  std::vector<double> l_raw;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  ProtocolCfg protocol;
};

int cmd_table(const Flags& f, std::ostream& out) {
  TableCfg cfg;
  if (has_preset(f)) {
    for (char c = 'A'; c <= 'H'; ++c) {
      ProfileCfg p;
      p.reference = p.label = std::string(1, c);
      cfg.profiles.push_back(p);
    }
    cfg.p_x = 0.5;
    cfg.y_max = {0.1, 0.01};
    cfg.l_raw = {1e9, 1e10, 1e11, kInf};
  }
  auto loaded = load(f);
  if (loaded) {
    Node root = config_root(loaded->first, loaded->second, "table");
    root.only({"cases", "profiles", "p_x", "y_max", "e_max", "l_raw", "seed", "samples", "protocol"});
    if (root.get("cases") || root.get("profiles")) cfg.profiles.clear();
    if (auto v = root.get("cases"))
      for (const auto& item : v->items()) {
        ProfileCfg p;
        p.reference = item.text();
        if (p.reference.size() != 1 || p.reference[0] < 'A' || p.reference[0] > 'H')
          item.fail("expected a case label A-H");
        p.label = p.reference;
        cfg.profiles.push_back(p);
      }
    if (auto v = root.get("profiles"))
      for (const auto& item : v->items()) cfg.profiles.push_back(ProfileCfg::read(item, false));
    if (auto v = root.get("p_x")) cfg.p_x = v->number();
    if (auto v = root.get("y_max")) cfg.y_max = v->numbers();
    if (auto v = root.get("e_max")) cfg.e_max = v->number();
    if (auto v = root.get("l_raw")) cfg.l_raw = v->numbers(true);
    if (auto v = root.get("seed")) cfg.seed = v->count();
    if (auto v = root.get("samples")) cfg.samples = v->count();
    if (auto v = root.get("protocol")) cfg.protocol.read(*v, false);
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.samples) cfg.samples = *f.samples;
  if (cfg.profiles.empty()) throw ConfigError("table: no cases or profiles given");
  if (!cfg.p_x) throw ConfigError("table: missing p_x");
  if (cfg.y_max.empty()) throw ConfigError("table: missing y_max list");
  if (cfg.l_raw.empty()) throw ConfigError("table: missing l_raw list");

  std::ostringstream csv;
  csv << "case,k,p_x,y_max,e_max,l_raw,samples,mean_rate,std_error,zero_fraction\n";
  std::vector<ProfilePtr> handles;
  for (const auto& p : cfg.profiles) handles.push_back(p.make(*cfg.p_x));
  for (double y_max : cfg.y_max) {
    for (std::size_t c = 0; c < cfg.profiles.size(); ++c) {
      for (double l : cfg.l_raw) {
        decoy_sampler s;
        decoy_sampler_defaults(&s);
        s.y_max = y_max;
        s.e_max = cfg.e_max;
        s.seed = cfg.seed;
        s.samples = cfg.samples;
        const decoy_protocol proto = cfg.protocol.to_c(l);
        decoy_rate_study r{};
        check(decoy_average_rate(handles[c].get(), &s, &proto, f.threads, &r));
        const double zero = r.samples ? static_cast<double>(r.zero_rate) / static_cast<double>(r.samples) : 0.0;
        csv << cfg.profiles[c].label << ',' << decoy_profile_size(handles[c].get()) << ',' << fmt(*cfg.p_x) << ','
            << fmt(y_max) << ',' << fmt(cfg.e_max) << ',' << fmt(l) << ',' << r.samples << ',' << fmt(r.mean)
            << ',' << fmt(r.std_error) << ',' << fmt(zero) << '\n';
      }
    }
  }
  emit(f, out, csv.str());
  return kOk;
}

// ---- optimize -------------------------------------------------------------

int cmd_optimize(const Flags& f, std::ostream& out, std::ostream& err) {
  decoy_optimize_options opt;
  decoy_optimize_defaults(&opt);
  bool have_k = has_preset(f);
  FiberCfg fiber;
  ProtocolCfg protocol;
  auto loaded = load(f);
  if (loaded) {
    Node root = config_root(loaded->first, loaded->second, "optimize");
    root.only({"k", "restarts", "mu_min", "mu_max", "seed", "max_evaluations", "polish_rounds", "fiber",
               "protocol"});
    if (auto v = root.get("k")) {
      opt.k = v->integer();
      have_k = true;
    }
    if (auto v = root.get("restarts")) opt.restarts = v->integer();
    if (auto v = root.get("mu_min")) opt.mu_min = v->number();
    if (auto v = root.get("mu_max")) opt.mu_max = v->number();
    if (auto v = root.get("seed")) opt.seed = v->count();
    if (auto v = root.get("max_evaluations")) opt.max_evaluations = v->integer();
    if (auto v = root.get("polish_rounds")) opt.polish_rounds = v->integer();
    if (auto v = root.get("fiber")) fiber.read(*v);
    if (auto v = root.get("protocol")) protocol.read(*v, true);
  }
  if (f.seed) opt.seed = *f.seed;
  if (!have_k) throw ConfigError("optimize: missing k");
  if (opt.k < 2 || opt.k > 6) throw ConfigError("optimize: k must lie in [2, 6], got " + std::to_string(opt.k));
  opt.threads = f.threads;

  std::vector<std::string> warnings;
  struct Sink {
    std::vector<std::string>* list;
    std::ostream* err;
  } sink{&warnings, &err};
  decoy_set_warning_handler(
      [](const char* msg, void* user) {
        auto* s = static_cast<Sink*>(user);
        s->list->push_back(msg);
        *s->err << "warning: " << msg << '\n';
      },
      &sink);
  struct Restore {
    ~Restore() { decoy_set_warning_handler(nullptr, nullptr); }
  } restore;

  const decoy_protocol proto = protocol.to_c(protocol.s_x);
  std::vector<double> restart_rates(static_cast<std::size_t>(std::max(opt.restarts, 0)));
  decoy_profile* best_raw = nullptr;
  decoy_rate_report report{};
  int evaluations = 0;
  check(decoy_optimize(&fiber.value, &proto, &opt, &best_raw, &report, restart_rates.data(), &evaluations));
  ProfilePtr best(best_raw);

  std::vector<double> sorted = restart_rates;
  std::sort(sorted.begin(), sorted.end());
  const auto positive = std::count_if(sorted.begin(), sorted.end(), [](double r) { return r > 0.0; });

  ojson doc;
  doc["command"] = "optimize";
  doc["config"] = ojson{{"k", opt.k},
                        {"restarts", opt.restarts},
                        {"mu_min", opt.mu_min},
                        {"mu_max", opt.mu_max},
                        {"seed", opt.seed},
                        {"max_evaluations", opt.max_evaluations},
                        {"polish_rounds", opt.polish_rounds},
                        {"fiber", fiber.to_json()},
                        {"protocol", protocol.to_json(true)}};
  ojson result = report_json(report);
  result["profile"] = profile_json(best.get());
  result["evaluations"] = evaluations;
  result["restart_rates"] = restart_rates;
  result["restart_stats"] = ojson{{"best", sorted.back()},
                                  {"median", sorted[sorted.size() / 2]},
                                  {"worst", sorted.front()},
                                  {"positive", positive}};
  result["warnings"] = warnings;
  doc["result"] = result;
  emit(f, out, dump(doc));
  return report.ill_defined ? kIllDefined : kOk;
}

// ---- errstudy -------------------------------------------------------------

std::string rel_cells(const decoy_relative_error& e) {
  return std::to_string(e.counted) + ',' + std::to_string(e.excluded) + ',' + fmt(e.mean) + ',' + fmt(e.max) + ',' +
         fmt(e.pooled);
}

int cmd_errstudy(const Flags& f, std::ostream& out) {
  std::string mode;
  decoy_baseline_config base;
  decoy_baseline_defaults(&base);
  std::vector<char> cases;
  if (has_preset(f)) {
    mode = "baseline";
    for (char c = 'A'; c <= 'H'; ++c) cases.push_back(c);
  }
  double y_max = base.sampler.y_max, e_max = base.sampler.e_max;
  auto loaded = load(f);
  if (loaded) {
    Node root = config_root(loaded->first, loaded->second, "errstudy");
    root.only({"mode", "mu1", "mu2", "mu3", "grid", "cases", "y_max", "e_max", "seed", "samples"});
    if (auto v = root.get("mode")) {
      mode = v->text();
      if (mode != "baseline" && mode != "generalized") v->fail("expected \"baseline\" or \"generalized\"");
    }
    auto range = [](const Node& n, double& lo, double& hi) {
      const auto r = n.numbers();
      if (r.size() != 2) n.fail("expected [min, max]");
      lo = r[0];
      hi = r[1];
    };
    if (auto v = root.get("mu1")) range(*v, base.mu1_min, base.mu1_max);
    if (auto v = root.get("mu2")) range(*v, base.mu2_min, base.mu2_max);
    if (auto v = root.get("mu3")) base.mu3 = v->number();
    if (auto v = root.get("grid")) base.grid = v->integer();
    if (auto v = root.get("cases")) {
      cases.clear();
      for (const auto& item : v->items()) {
        const std::string s = item.text();
        if (s.size() != 1 || s[0] < 'A' || s[0] > 'H') item.fail("expected a case label A-H");
        cases.push_back(s[0]);
      }
    }
    if (auto v = root.get("y_max")) y_max = v->number();
    if (auto v = root.get("e_max")) e_max = v->number();
    if (auto v = root.get("seed")) base.sampler.seed = v->count();
    if (auto v = root.get("samples")) base.sampler.samples = v->count();
  }
  if (f.seed) base.sampler.seed = *f.seed;
  if (f.samples) base.sampler.samples = *f.samples;
  base.sampler.y_max = y_max;
  base.sampler.e_max = e_max;
  if (mode.empty()) throw ConfigError("errstudy: missing mode");

  std::ostringstream csv;
  csv << "mode,label,k,mu1,mu2,mu3,quantity,counted,excluded,mean,max,pooled,worst_config_mean,c2_estimate,"
         "c2_exact\n";
  if (mode == "baseline") {
    decoy_baseline_study* raw = nullptr;
    check(decoy_baseline_study_run(&base, f.threads, &raw));
    StudyPtr study(raw);
    for (std::size_t i = 0; i < decoy_baseline_study_points(study.get()); ++i) {
      decoy_baseline_point p;
      check(decoy_baseline_study_point(study.get(), i, &p));
      const std::string mus = fmt(p.mu1) + ',' + fmt(p.mu2) + ',' + fmt(p.mu3);
      csv << "baseline,grid,3," << mus << ",y1," << rel_cells(p.y1) << ",,,\n";
      csv << "baseline,grid,3," << mus << ",y1h2," << rel_cells(p.y1h2) << ",,,\n";
    }
    decoy_baseline_summary s;
    check(decoy_baseline_study_summary(study.get(), &s));
    csv << "baseline,all,3,,,,y1," << rel_cells(s.y1) << ',' << fmt(s.y1_worst_config_mean) << ",,\n";
    csv << "baseline,all,3,,,,y1h2," << rel_cells(s.y1h2) << ',' << fmt(s.y1h2_worst_config_mean) << ",,\n";
  } else {
    if (cases.empty()) throw ConfigError("errstudy: no cases given");
    for (char c : cases) {
      decoy_generalized_result r;
      check(decoy_generalized_study(c, &base.sampler, f.threads, &r));
      csv << "generalized," << c << ',' << r.k << ",,,,y1," << rel_cells(r.y1) << ",," << fmt(r.c2_estimate_y1)
          << ',' << fmt(r.c2_exact_y1) << '\n';
      csv << "generalized," << c << ',' << r.k << ",,,,y1e1," << rel_cells(r.y1e1) << ",,"
          << fmt(r.c2_estimate_y1e1) << ',' << fmt(r.c2_exact_y1e1) << '\n';
    }
  }
  emit(f, out, csv.str());
  return kOk;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("no column \"" + name + "\"");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw std::runtime_error("csv line " + std::to_string(number) + ": expected " +
                                 std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decoy-state BB84 finite-key rates", "decoyqkd"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON configuration file");
    sub->add_option("--preset", flags.preset, "named defaults (paper-defaults)");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--samples", flags.samples, "Monte Carlo sample count");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--output", flags.output, "write output here instead of stdout");
  };
  CLI::App* rate = app.add_subcommand("rate", "key rate for one profile and channel");
  CLI::App* table = app.add_subcommand("table", "Monte Carlo mean rates, one CSV row per cell");
  CLI::App* optimize = app.add_subcommand("optimize", "maximize the fiber rate over the profile");
  CLI::App* errstudy = app.add_subcommand("errstudy", "relative errors of the yield bounds");
  for (auto* sub : {rate, table, optimize, errstudy}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (rate->parsed()) return cmd_rate(flags, out);
    if (table->parsed()) return cmd_table(flags, out);
    if (optimize->parsed()) return cmd_optimize(flags, out, err);
    return cmd_errstudy(flags, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace decoycli

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qfixed/arithmetic.hpp"
#include "qfixed/functions.hpp"
#include "qfixed/simulator.hpp"

using nlohmann::ordered_json;
using namespace qfixed;

namespace {

struct Options {
  std::string func;
  std::string name;
  std::optional<int> n, p, d, m;
  std::optional<long double> eps;
  std::string domain;
  std::string parity;
  int N = 2000;
  bool tuned = true;
  bool uncompute = false;
  std::string out;
  std::string format = "csv";
  bool crosscheck = true;
  std::vector<std::string> xs;
  int pebbles = 0, chain = 0;
};

long double parse_real(std::string s) {
  if (s.empty()) throw std::invalid_argument("empty number");
  if (const auto slash = s.find('/'); slash != std::string::npos)
    return parse_real(s.substr(0, slash)) / parse_real(s.substr(slash + 1));
  bool neg = false;
  if (s[0] == '-') {
    neg = true;
    s.erase(0, 1);
  }
  long double v;
  if (s == "pi") {
    v = std::numbers::pi_v<long double>;
  } else {
    std::size_t used = 0;
    v = std::stold(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  }
  return neg ? -v : v;
}

std::pair<long double, long double> parse_domain(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--domain expects lo:hi");
  const long double lo = parse_real(text.substr(0, colon)), hi = parse_real(text.substr(colon + 1));
  if (!(lo < hi)) throw std::invalid_argument("--domain needs lo < hi");
  return {lo, hi};
}

std::string g17(long double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17Lg", v);
  return buf;
}

struct Built {
  Circuit circuit;
  std::string in = "a", out = "out", ref;
  long double lo = 0, hi = 1;
  std::optional<long long> formula;
  ordered_json report;
};

// Parameters resolved without building anything.
struct Plan {
  std::string func, ref;
  FxFormat format{};
  int m = 0, d = 0;
  long double eps = 0, lo = 0, hi = 1;
  Parity parity = Parity::None;
};

Plan make_plan(const Options& o) {
  Plan pl;
  pl.func = o.func;
  if (o.func == "invsqrt" || o.func == "sqrt") {
    pl.format = FxFormat(o.n.value_or(35), o.p.value_or(12));
    pl.m = o.m.value_or(3);
    pl.ref = o.func;
    pl.lo = o.func == "invsqrt" ? 1.0L / 200 : 0;
    pl.hi = 5;
  } else if (o.func == "arcsin") {
    pl.format = FxFormat(o.n.value_or(35), o.p.value_or(2));
    pl.m = o.m.value_or(3);
    pl.d = o.d.value_or(7);
    pl.ref = "arcsin";
    pl.lo = 0;
    pl.hi = 1;
  } else if (o.func == "smooth") {
    if (o.name.empty()) throw std::invalid_argument("smooth needs a function name");
    const SmoothPreset& pre = smooth_preset(o.name);
    pl.format = FxFormat(o.n.value_or(pre.format.n), o.p.value_or(pre.format.p));
    pl.d = o.d.value_or(3);
    pl.eps = o.eps.value_or(1e-5L);
    pl.parity = o.parity.empty() ? pre.parity : parse_parity(o.parity);
    pl.ref = o.name;
    pl.lo = pre.lo;
    pl.hi = pre.hi;
  } else {
    throw std::invalid_argument("unknown function '" + o.func + "' (invsqrt, sqrt, arcsin, smooth NAME)");
  }
  if (!o.domain.empty()) std::tie(pl.lo, pl.hi) = parse_domain(o.domain);
  return pl;
}

Built build(const Options& o) {
  const Plan pl = make_plan(o);
  Built b;
  b.ref = pl.ref;
  b.lo = pl.lo;
  b.hi = pl.hi;
  const FxFormat f = pl.format;
  auto& r = b.report;
  r["function"] = o.func == "smooth" ? "smooth " + o.name : o.func;
  r["n"] = f.n;
  r["p"] = f.p;
  if (o.func == "invsqrt" || o.func == "sqrt") {
    const NewtonConfig cfg{f, pl.m, o.tuned};
    r["m"] = pl.m;
    r["tuned"] = o.tuned;
    if (o.func == "invsqrt") {
      b.circuit = build_invsqrt(cfg);
      b.formula = t_invsqrt(f.n, pl.m, f.p);
    } else {
      b.circuit = build_sqrt(cfg);
      b.formula = t_invsqrt(f.n, pl.m, f.p) + t_mul(f.n, f.p);
    }
    r["qubits_formula"] = invsqrt_qubits(f.n, pl.m);
  } else if (o.func == "arcsin") {
    ArcsinConfig cfg;
    cfg.format = f;
    cfg.m = pl.m;
    cfg.degree = pl.d;
    cfg.tuned = o.tuned;
    ArcsinCircuit ac = build_arcsin(cfg);
    b.circuit = std::move(ac.circuit);
    b.in = "x";
    r["m"] = pl.m;
    r["d"] = pl.d;
    r["tuned"] = o.tuned;
    r["sqrt_point"] = ac.sqrt_point;
    r["eps_certified"] = static_cast<double>(ac.minimax_error);
    r["toffoli_estimate"] = t_arcsin(f.n, pl.m, f.p, pl.d);
  } else {
    SmoothCircuit sc = build_smooth(pl.ref, pl.lo, pl.hi, pl.d, pl.eps, f, pl.parity, o.uncompute);
    const int M = sc.partition.poly.pieces();
    b.circuit = std::move(sc.circuit);
    b.in = "x";
    if (o.uncompute) b.out = "result";
    r["d"] = pl.d;
    r["eps"] = static_cast<double>(pl.eps);
    r["parity"] = std::string(parity_name(pl.parity));
    r["M"] = M;
    r["eps_certified"] = static_cast<double>(sc.partition.certified_error());
    r["toffoli_estimate"] = t_pp(f.n, pl.d, f.p, M);
    r["qubits_estimate"] = pp_qubits(f.n, pl.d, M);
    if (pl.parity == Parity::None && pl.lo >= 0)
      b.formula = t_pp_constructed(f.n, pl.d, f.p, M) * (o.uncompute ? 2 : 1);
  }
  const ResourceCount rc = count_resources(b.circuit);
  r["toffoli_constructed"] = rc.toffoli;
  if (b.formula) r["toffoli_formula"] = *b.formula;
  r["qubits"] = rc.qubits;
  r["cnot"] = rc.cnots;
  r["not"] = rc.nots;
  return b;
}

// Records the crosscheck verdict in the report; false only on a mismatch.
bool crosscheck(const Options& o, Built& b) {
  if (!o.crosscheck) {
    b.report["crosscheck"] = "skipped";
    return true;
  }
  if (!b.formula) {
    b.report["crosscheck"] = "none";
    return true;
  }
  const bool ok = b.report["toffoli_constructed"].get<long long>() == *b.formula;
  b.report["crosscheck"] = ok ? "pass" : "fail";
  if (!ok)
    std::cerr << "crosscheck failed: constructed " << b.report["toffoli_constructed"] << " vs formula " << *b.formula
              << '\n';
  return ok;
}

void emit_text(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(o.out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + o.out);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + o.out);
}

std::string render_rows(const Options& o, const std::vector<SweepRow>& rows, const FxFormat& fin) {
  if (o.format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json j;
      j["x"] = exact_decimal(encode(r.x, fin).raw(), fin.frac_bits());
      j["circuit_value"] = exact_decimal(r.circuit_raw, r.circuit_frac_bits);
      j["reference_value"] = static_cast<double>(r.reference);
      j["abs_error"] = static_cast<double>(r.abs_error);
      arr.push_back(j);
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "x,circuit_value,reference_value,abs_error\n";
  for (const auto& r : rows)
    os << exact_decimal(encode(r.x, fin).raw(), fin.frac_bits()) << ','
       << exact_decimal(r.circuit_raw, r.circuit_frac_bits) << ',' << g17(r.reference) << ',' << g17(r.abs_error)
       << '\n';
  return os.str();
}

int cmd_synth(const Options& o) {
  Built b = build(o);
  const bool ok = crosscheck(o, b);
  if (!o.out.empty()) {
    std::ostringstream os;
    write_circuit(os, b.circuit);
    emit_text(o, os.str());
    b.report["circuit_file"] = o.out;
  }
  std::cout << b.report.dump(2) << '\n';
  return ok ? 0 : 1;
}

int cmd_estimate(const Options& o) {
  const Plan pl = make_plan(o);
  const FxFormat f = pl.format;
  ordered_json r;
  r["function"] = o.func == "smooth" ? "smooth " + o.name : o.func;
  r["n"] = f.n;
  r["p"] = f.p;
  std::optional<long long> formula;
  if (o.func == "invsqrt" || o.func == "sqrt") {
    r["m"] = pl.m;
    r["t_init"] = t_init(f.n);
    r["t_iter"] = t_iter(f.n, f.p);
    r["t_invsqrt"] = t_invsqrt(f.n, pl.m, f.p);
    if (o.func == "sqrt") r["t_mul"] = t_mul(f.n, f.p);
    r["qubits"] = invsqrt_qubits(f.n, pl.m);
  } else if (o.func == "arcsin") {
    r["m"] = pl.m;
    r["d"] = pl.d;
    r["t_arcsin"] = t_arcsin(f.n, pl.m, f.p, pl.d);
  } else {
    const Partition part = partition_domain(
        [&](long double x) { return static_cast<long double>(ref_float(pl.ref, static_cast<double>(x))); }, pl.lo, pl.hi,
        pl.d, pl.eps, f, pl.parity);
    const int M = part.poly.pieces();
    r["d"] = pl.d;
    r["M"] = M;
    r["t_poly"] = t_poly(f.n, pl.d, f.p);
    r["t_pp"] = t_pp(f.n, pl.d, f.p, M);
    r["qubits"] = pp_qubits(f.n, pl.d, M);
  }
  bool ok = true;
  if (o.crosscheck && o.func != "arcsin") {
    Built b = build(o);
    ok = crosscheck(o, b);
    r["toffoli_constructed"] = b.report["toffoli_constructed"];
    r["crosscheck"] = b.report["crosscheck"];
  }
  if (o.format == "json") {
    emit_text(o, r.dump(2) + "\n");
  } else {
    std::ostringstream os;
    os << "key,value\n";
    for (const auto& [k, v] : r.items()) os << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    emit_text(o, os.str());
  }
  return ok ? 0 : 1;
}

int cmd_simulate(const Options& o) {
  if (o.xs.empty()) throw std::invalid_argument("simulate needs at least one --x value");
  Built b = build(o);
  const bool ok = crosscheck(o, b);
  const Register& in = b.circuit.reg(b.in);
  const Register& out = b.circuit.reg(b.out);
  const FxFormat fin = in.format(), fout = out.format();
  std::vector<std::uint64_t> words;
  for (const auto& s : o.xs) words.push_back(encode(parse_real(s), fin).bits());
  const auto outs = evaluate_words(b.circuit, in, out, words);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < words.size(); ++i) {
    SweepRow r;
    r.x = decode(FxWord(fin, words[i]));
    const FxWord w(fout, outs[i]);
    r.circuit_raw = w.raw();
    r.circuit_frac_bits = fout.frac_bits();
    r.circuit = decode(w);
    r.reference = ref_float(b.ref, static_cast<double>(r.x));
    r.abs_error = std::fabs(r.circuit - r.reference);
    rows.push_back(r);
  }
  emit_text(o, render_rows(o, rows, fin));
  return ok ? 0 : 1;
}

int cmd_sweep(const Options& o) {
  Built b = build(o);
  const bool ok = crosscheck(o, b);
  const Register& in = b.circuit.reg(b.in);
  const auto rows = sweep_circuit(b.circuit, in, b.circuit.reg(b.out), b.ref, b.lo, b.hi, o.N);
  emit_text(o, render_rows(o, rows, in.format()));
  std::cerr << "max_abs_error " << g17(max_abs_error(rows)) << '\n';
  return ok ? 0 : 1;
}

int cmd_partition(const Options& o) {
  Options so = o;
  so.func = "smooth";
  const Plan pl = make_plan(so);
  const Partition part = partition_domain(
      [&](long double x) { return static_cast<long double>(ref_float(pl.ref, static_cast<double>(x))); }, pl.lo, pl.hi,
      pl.d, pl.eps, pl.format, pl.parity);
  const PiecewisePoly& pp = part.poly;
  if (o.format == "json") {
    emit_text(o, to_json(pp) + "\n");
  } else {
    std::ostringstream os;
    os << "piece,t_lo,t_hi,fit_error,certified_error";
    for (int j = 0; j <= pp.degree; ++j) os << ",c" << j;
    os << '\n';
    for (int l = 0; l < pp.pieces(); ++l) {
      const auto i = static_cast<std::size_t>(l);
      os << l << ',' << g17(pp.breakpoints[i]) << ',' << g17(pp.breakpoints[i + 1]) << ',' << g17(part.fit_error[i])
         << ',' << g17(part.certified[i]);
      for (long double c : pp.coeffs[i]) os << ',' << g17(c);
      os << '\n';
    }
    emit_text(o, os.str());
  }
  std::cerr << "pieces " << pp.pieces() << " certified_error " << g17(part.certified_error()) << '\n';
  return 0;
}

int cmd_pebble(const Options& o) {
  const PebbleSchedule s = pebble_optimal(o.pebbles, o.chain);
  if (o.format == "json") {
    ordered_json j;
    j["m"] = o.pebbles;
    j["r"] = o.chain;
    j["feasible"] = s.feasible;
    if (s.feasible) {
      j["total"] = s.total;
      ordered_json moves = ordered_json::array();
      for (const auto& mv : s.steps) moves.push_back({{"pebble", mv.pebble}, {"node", mv.node}});
      j["steps"] = moves;
    }
    emit_text(o, j.dump(2) + "\n");
    return 0;
  }
  if (s.feasible) {
    std::cout << s.total << '\n';
    if (!o.out.empty()) emit_text(o, schedule_to_text(s));
  } else {
    std::cout << "infeasible\n";
  }
  return 0;
}

int cmd_table1(const Options& o) {
  const int cols[] = {1, 2, 3, 4, 5, 6, 7, 8, 16, 32, 64};
  if (o.format == "json") {
    ordered_json j;
    j["r"] = cols;
    ordered_json rows = ordered_json::array();
    for (int m = 1; m <= 8; ++m) {
      ordered_json cells = ordered_json::array();
      for (int r : cols) {
        const auto c = pebble_cost(m, r);
        cells.push_back(c ? ordered_json(*c) : ordered_json(nullptr));
      }
      rows.push_back({{"m", m}, {"steps", cells}});
    }
    j["rows"] = rows;
    emit_text(o, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream os;
  os << "m";
  for (int r : cols) os << ',' << r;
  os << '\n';
  for (int m = 1; m <= 8; ++m) {
    os << m;
    for (int r : cols) {
      const auto c = pebble_cost(m, r);
      os << ',' << (c ? std::to_string(*c) : std::string("inf"));
    }
    os << '\n';
  }
  emit_text(o, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reversible fixed-point circuit compiler and simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--n", o.n, "word width")->check(CLI::Range(1, 64));
  app.add_option("--p", o.p, "integer bits including sign")->check(CLI::Range(0, 64));
  app.add_option("--d", o.d, "polynomial degree")->check(CLI::Range(0, 64));
  app.add_option("--m", o.m, "Newton iterations")->check(CLI::Range(1, 64));
  app.add_option("--eps", o.eps, "target approximation error")->check(CLI::PositiveNumber);
  app.add_option("--domain", o.domain, "input interval lo:hi (use --domain=-4:4 for a negative lo)");
  app.add_option("--parity", o.parity, "none, even or odd (smooth functions)");
  app.add_option("--N", o.N, "sweep points")->check(CLI::Range(2, 100000000));
  app.add_flag("--tuned,!--untuned", o.tuned, "tuned guess constants (default on)");
  app.add_flag("--uncompute", o.uncompute, "wrap smooth circuits as compute, copy, uncompute");
  app.add_option("--out", o.out, "output file");
  app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("!--no-crosscheck", o.crosscheck, "skip formula vs construction checks");

  auto func_args = [&](CLI::App* sub) {
    sub->add_option("function", o.func, "invsqrt, sqrt, arcsin or smooth")->required();
    sub->add_option("name", o.name, "tanh, gauss, sin, exp_neg or arcsin (smooth only)");
  };
  auto* synth = app.add_subcommand("synth", "build a circuit, report its resources");
  func_args(synth);
  auto* estimate = app.add_subcommand("estimate", "closed-form resource estimates");
  func_args(estimate);
  auto* simulate = app.add_subcommand("simulate", "run a circuit on given inputs");
  func_args(simulate);
  simulate->add_option("--x", o.xs, "input values")->required();
  auto* sweep = app.add_subcommand("sweep", "error sweep over equidistant points");
  func_args(sweep);
  auto* partition = app.add_subcommand("partition", "piecewise minimax partition of a smooth function");
  partition->add_option("name", o.name, "tanh, gauss, sin, exp_neg or arcsin")->required();
  auto* pebble = app.add_subcommand("pebble", "optimal pebbling of a chain");
  pebble->add_option("m", o.pebbles, "registers")->required()->check(CLI::PositiveNumber);
  pebble->add_option("r", o.chain, "chain length")->required()->check(CLI::PositiveNumber);
  auto* table1 = app.add_subcommand("table1", "optimal pebbling steps for m = 1..8");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return cmd_synth(o);
    if (*estimate) return cmd_estimate(o);
    if (*simulate) return cmd_simulate(o);
    if (*sweep) return cmd_sweep(o);
    if (*partition) return cmd_partition(o);
    if (*pebble) return cmd_pebble(o);
    if (*table1) return cmd_table1(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

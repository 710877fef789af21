#include "gridsced/matpower.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace gridsced {

namespace {

// MATPOWER v2 column positions (0-based).
enum BusCol { kBusI = 0, kBusType = 1, kPd = 2, kQd = 3, kGs = 4, kBs = 5, kVm = 7, kVa = 8, kBaseKv = 9, kVmax = 11, kVmin = 12 };
enum GenCol { kGenBus = 0, kPg = 1, kQmax = 3, kQmin = 4, kVg = 5, kGenStatus = 7, kPmax = 8, kPmin = 9, kRamp10 = 16 };
enum BranchCol { kFbus = 0, kTbus = 1, kBrR = 2, kBrX = 3, kBrB = 4, kRateA = 5, kRateC = 7, kTap = 8, kShift = 9, kBrStatus = 10 };
enum CostCol { kModel = 0, kNcost = 3, kCostData = 4 };

using Matrix = std::vector<std::vector<double>>;

struct Scanner {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit Scanner(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw DataError("syntax error at line " + std::to_string(line) + ", column " +
                    std::to_string(col) + ": " + message);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }

  char advance() {
    char c = text[pos++];
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    return c;
  }

  // Skips whitespace, % and # comments, and MATLAB line continuations.
  void skip_blanks(bool stop_at_newline = false) {
    while (!eof()) {
      char c = peek();
      if (c == '%' || c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == '.' && text.compare(pos, 3, "...") == 0) {
        advance();
        advance();
        advance();
      } else if (c == '\n') {
        if (stop_at_newline) return;
        advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string identifier() {
    skip_blanks();
    std::string name;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.')) {
      name += advance();
    }
    return name;
  }

  double number() {
    skip_blanks();
    const char* start = text.c_str() + pos;
    char* end = nullptr;
    double value = std::strtod(start, &end);
    if (end == start) fail("expected a number");
    for (const char* p = start; p < end; ++p) advance();
    return value;
  }

  bool try_consume(char c, bool stop_at_newline = false) {
    skip_blanks(stop_at_newline);
    if (!eof() && peek() == c) {
      advance();
      return true;
    }
    return false;
  }
};

Matrix parse_matrix(Scanner& s) {
  if (!s.try_consume('[')) s.fail("expected '['");
  Matrix rows;
  std::vector<double> row;
  while (true) {
    s.skip_blanks(/*stop_at_newline=*/true);
    if (s.eof()) s.fail("unterminated matrix");
    char c = s.peek();
    if (c == ']') {
      s.advance();
      if (!row.empty()) rows.push_back(std::move(row));
      break;
    }
    if (c == ';' || c == '\n') {
      s.advance();
      if (!row.empty()) {
        rows.push_back(std::move(row));
        row.clear();
      }
      continue;
    }
    if (c == ',') {
      s.advance();
      continue;
    }
    row.push_back(s.number());
  }
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) {
      s.fail("ragged matrix: row with " + std::to_string(r.size()) + " columns, expected " +
             std::to_string(rows.front().size()));
    }
  }
  return rows;
}

// Skips a quoted string or a {...} cell array.
void skip_value(Scanner& s) {
  s.skip_blanks();
  if (s.eof()) return;
  char c = s.peek();
  if (c == '\'') {
    s.advance();
    while (!s.eof() && s.peek() != '\'') s.advance();
    if (!s.eof()) s.advance();
  } else if (c == '{') {
    int depth = 0;
    while (!s.eof()) {
      char d = s.advance();
      if (d == '{') ++depth;
      if (d == '}' && --depth == 0) break;
    }
  } else {
    while (!s.eof() && s.peek() != ';' && s.peek() != '\n') s.advance();
  }
}

double col(const std::vector<double>& row, int index, double fallback = 0.0) {
  return index < static_cast<int>(row.size()) ? row[index] : fallback;
}

double poly_value(const std::vector<double>& coeff, double p) {
  double v = 0.0;
  for (double c : coeff) v = v * p + c;
  return v;
}

double poly_derivative(const std::vector<double>& coeff, double p) {
  double v = 0.0;
  int n = static_cast<int>(coeff.size());
  for (int i = 0; i < n - 1; ++i) v = v * p + coeff[i] * (n - 1 - i);
  return v;
}

CostCurve pwl_from_polynomial(int gen_id, const std::vector<double>& coeff, double p_min,
                              double p_max) {
  CostCurve curve;
  curve.owner = gen_id;
  curve.start_mw = p_min;
  curve.start_cost = poly_value(coeff, p_min);
  double width = (p_max - p_min) / kCostSegments;
  if (width <= 0) return curve;
  double prev_price = -kInfinity;
  for (int s = 0; s < kCostSegments; ++s) {
    double lo = p_min + s * width;
    double price = poly_derivative(coeff, lo + width / 2.0);
    if (price < prev_price - 1e-9 * std::max(1.0, std::abs(prev_price))) {
      throw DataError("non-convex polynomial cost for generator " + std::to_string(gen_id));
    }
    price = std::max(price, prev_price);
    curve.segments.push_back({p_min + (s + 1) * width, price});
    prev_price = price;
  }
  curve.segments.back().end_mw = p_max;  // avoid rounding drift at the top breakpoint
  return curve;
}

CostCurve pwl_from_points(int gen_id, const std::vector<double>& data, int npoints) {
  if (npoints < 2 || static_cast<int>(data.size()) < 2 * npoints) {
    throw DataError("PWL cost row for generator " + std::to_string(gen_id) + " is too short");
  }
  CostCurve curve;
  curve.owner = gen_id;
  curve.start_mw = data[0];
  curve.start_cost = data[1];
  double prev_x = data[0];
  double prev_y = data[1];
  double prev_price = -kInfinity;
  for (int i = 1; i < npoints; ++i) {
    double x = data[2 * i];
    double y = data[2 * i + 1];
    if (x <= prev_x) {
      throw DataError("PWL cost breakpoints not increasing for generator " + std::to_string(gen_id));
    }
    double price = (y - prev_y) / (x - prev_x);
    if (price < prev_price - 1e-9 * std::max(1.0, std::abs(prev_price))) {
      throw DataError("non-convex PWL cost for generator " + std::to_string(gen_id));
    }
    curve.segments.push_back({x, price});
    prev_x = x;
    prev_y = y;
    prev_price = price;
  }
  return curve;
}

}  // namespace

NetworkModel parse_matpower_case(const std::string& text, std::vector<std::string>* warnings) {
  Scanner s(text);
  double base_mva = 0.0;
  bool have_base = false;
  Matrix bus, gen, branch, gencost;
  bool have_bus = false, have_gen = false, have_branch = false, have_gencost = false;

  while (true) {
    s.skip_blanks();
    if (s.eof()) break;
    std::string name = s.identifier();
    if (name.empty()) s.fail("expected an identifier");
    if (name == "function") {
      while (!s.eof() && s.peek() != '\n') s.advance();
      continue;
    }
    // Strip the struct prefix: mpc.bus -> bus.
    auto dot = name.rfind('.');
    std::string field = dot == std::string::npos ? name : name.substr(dot + 1);
    if (!s.try_consume('=')) s.fail("expected '=' after '" + name + "'");
    if (field == "baseMVA") {
      base_mva = s.number();
      have_base = true;
    } else if (field == "bus") {
      bus = parse_matrix(s);
      have_bus = true;
    } else if (field == "gen") {
      gen = parse_matrix(s);
      have_gen = true;
    } else if (field == "branch") {
      branch = parse_matrix(s);
      have_branch = true;
    } else if (field == "gencost") {
      gencost = parse_matrix(s);
      have_gencost = true;
    } else {
      // version string, bus_name cells, areas, ...
      s.skip_blanks();
      if (s.peek() == '[') {
        parse_matrix(s);
      } else {
        skip_value(s);
      }
    }
    s.try_consume(';');
  }

  if (!have_base) throw DataError("case has no baseMVA");
  if (!have_bus) throw DataError("case has no bus matrix");
  if (!have_gen) throw DataError("case has no gen matrix");
  if (!have_branch) throw DataError("case has no branch matrix");

  auto warn = [&](const std::string& message) {
    if (warnings) warnings->push_back(message);
  };

  NetworkModel model;
  model.base_mva = base_mva;

  for (const auto& row : bus) {
    if (row.size() < 13) throw DataError("bus row with fewer than 13 columns");
    Bus b;
    b.id = static_cast<int>(row[kBusI]);
    int type = static_cast<int>(row[kBusType]);
    switch (type) {
      case 3: b.kind = BusKind::Slack; break;
      case 2: b.kind = BusKind::PV; break;
      case 1: b.kind = BusKind::PQ; break;
      case 4:
        warn("bus " + std::to_string(b.id) + " is marked isolated; treating as PQ");
        b.kind = BusKind::PQ;
        break;
      default:
        throw DataError("bus " + std::to_string(b.id) + " has unknown type " + std::to_string(type));
    }
    b.p_load = row[kPd];
    b.q_load = row[kQd];
    b.shunt_g = row[kGs];
    b.shunt_b = row[kBs];
    b.v_setpoint = row[kVm] > 0 ? row[kVm] : 1.0;
    b.base_kv = row[kBaseKv];
    b.v_max = row[kVmax];
    b.v_min = row[kVmin];
    model.buses.push_back(b);
  }

  int next_gen_id = 1;
  for (const auto& row : gen) {
    if (row.size() < 10) throw DataError("gen row with fewer than 10 columns");
    Generator g;
    g.id = next_gen_id++;
    g.bus = static_cast<int>(row[kGenBus]);
    g.p_initial = row[kPg];
    g.q_max = row[kQmax];
    g.q_min = row[kQmin];
    g.online = col(row, kGenStatus, 1.0) > 0;
    g.p_max = row[kPmax];
    g.p_min = row[kPmin];
    double ramp10 = col(row, kRamp10, 0.0);
    g.ramp_rate = ramp10 > 0 ? ramp10 / 10.0 : kInfinity;
    g.reserve_price = 0.0;
    if (g.online) {
      if (g.p_initial < g.p_min || g.p_initial > g.p_max) {
        warn("generator " + std::to_string(g.id) + " initial dispatch " +
             std::to_string(g.p_initial) + " clamped into [" + std::to_string(g.p_min) + ", " +
             std::to_string(g.p_max) + "]");
        g.p_initial = std::clamp(g.p_initial, g.p_min, g.p_max);
      }
      // Propagate the voltage setpoint to the regulated bus.
      double vg = col(row, kVg, 0.0);
      if (vg > 0) {
        for (auto& b : model.buses) {
          if (b.id == g.bus && b.kind != BusKind::PQ) b.v_setpoint = vg;
        }
      }
    }
    model.generators.push_back(g);
  }

  int next_branch_id = 1;
  for (const auto& row : branch) {
    if (row.size() < 11) throw DataError("branch row with fewer than 11 columns");
    Branch br;
    br.id = next_branch_id++;
    br.from_bus = static_cast<int>(row[kFbus]);
    br.to_bus = static_cast<int>(row[kTbus]);
    br.r = row[kBrR];
    br.x = row[kBrX];
    br.b_charging = row[kBrB];
    br.rate_normal = row[kRateA];
    br.rate_emergency = row[kRateC];
    br.tap_ratio = row[kTap] > 0 ? row[kTap] : 1.0;
    br.phase_shift = row[kShift];
    br.in_service = row[kBrStatus] > 0;
    model.branches.push_back(br);
  }

  if (have_gencost) {
    // MATPOWER appends optional reactive cost rows; only the first
    // num_generators rows describe active power.
    std::size_t rows = std::min(gencost.size(), model.generators.size());
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& row = gencost[i];
      if (row.size() < 5) throw DataError("gencost row with fewer than 5 columns");
      const Generator& g = model.generators[i];
      int cost_model = static_cast<int>(row[kModel]);
      int ncost = static_cast<int>(row[kNcost]);
      std::vector<double> data(row.begin() + kCostData, row.end());
      if (cost_model == 1) {
        model.cost_curves.push_back(pwl_from_points(g.id, data, ncost));
      } else if (cost_model == 2) {
        if (ncost < 1 || static_cast<int>(data.size()) < ncost) {
          throw DataError("polynomial cost row for generator " + std::to_string(g.id) +
                          " is too short");
        }
        data.resize(ncost);
        model.cost_curves.push_back(pwl_from_polynomial(g.id, data, g.p_min, g.p_max));
      } else {
        throw DataError("unknown gencost model " + std::to_string(cost_model));
      }
    }
  }

  model.finalize();
  return model;
}

NetworkModel load_matpower_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_matpower_case(buffer.str(), warnings);
}

std::string write_matpower_case(const NetworkModel& model, const std::string& case_name) {
  std::ostringstream out;
  out.precision(17);
  out << "function mpc = " << case_name << "\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << model.base_mva << ";\n\n";

  out << "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\n";
  out << "mpc.bus = [\n";
  for (const auto& b : model.buses) {
    int type = b.kind == BusKind::Slack ? 3 : (b.kind == BusKind::PV ? 2 : 1);
    out << "  " << b.id << " " << type << " " << b.p_load << " " << b.q_load << " " << b.shunt_g
        << " " << b.shunt_b << " 1 " << b.v_setpoint << " 0 " << b.base_kv << " 1 " << b.v_max
        << " " << b.v_min << ";\n";
  }
  out << "];\n\n";

  out << "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin Pc1 Pc2 Qc1min Qc1max Qc2min Qc2max "
         "ramp_agc ramp_10 ramp_30 ramp_q apf\n";
  out << "mpc.gen = [\n";
  for (const auto& g : model.generators) {
    double vg = model.bus(g.bus).v_setpoint;
    double ramp10 = std::isinf(g.ramp_rate) ? 0.0 : g.ramp_rate * 10.0;
    out << "  " << g.bus << " " << g.p_initial << " 0 " << g.q_max << " " << g.q_min << " " << vg
        << " " << model.base_mva << " " << (g.online ? 1 : 0) << " " << g.p_max << " " << g.p_min
        << " 0 0 0 0 0 0 0 " << ramp10 << " 0 0 0;\n";
  }
  out << "];\n\n";

  out << "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax\n";
  out << "mpc.branch = [\n";
  for (const auto& br : model.branches) {
    out << "  " << br.from_bus << " " << br.to_bus << " " << br.r << " " << br.x << " "
        << br.b_charging << " " << br.rate_normal << " 0 " << br.rate_emergency << " "
        << (br.tap_ratio == 1.0 ? 0.0 : br.tap_ratio) << " " << br.phase_shift << " "
        << (br.in_service ? 1 : 0) << " -360 360;\n";
  }
  out << "];\n\n";

  out << "%% model startup shutdown n x1 y1 ... xn yn\n";
  out << "mpc.gencost = [\n";
  for (const auto& g : model.generators) {
    const CostCurve* curve = model.cost_curve_for(g.id);
    if (!curve || curve->segments.empty()) {
      out << "  2 0 0 2 0 " << (curve ? curve->start_cost : 0.0) << ";\n";
      continue;
    }
    out << "  1 0 0 " << (curve->segments.size() + 1);
    double x = curve->start_mw;
    out << " " << x << " " << curve->start_cost;
    for (const auto& seg : curve->segments) {
      out << " " << seg.end_mw << " " << curve->cost_at(seg.end_mw);
    }
    out << ";\n";
  }
  out << "];\n";
  return out.str();
}

}  // namespace gridsced

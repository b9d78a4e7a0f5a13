#include "difq/scenario_json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace difq {

namespace {

using Json = nlohmann::ordered_json;

Json grid_to_json(const GridSegment& g) {
  Json j;
  j["v_ll_rms"] = g.v_ll_rms;
  j["phase_offset"] = g.phase_offset;
  j["freq_hz"] = g.freq_hz;
  bool any_override = false;
  for (double v : g.per_phase_v_rms) any_override |= (v >= 0.0);
  if (any_override) j["per_phase_v_rms"] = g.per_phase_v_rms;
  if (!g.harmonics.empty()) {
    Json hs = Json::array();
    for (const auto& h : g.harmonics) {
      hs.push_back({{"order", h.order},
                    {"magnitude_pu", h.magnitude_pu},
                    {"phase_rad", h.phase_rad}});
    }
    j["harmonics"] = hs;
  }
  return j;
}

GridSegment grid_from_json(const Json& j) {
  GridSegment g;
  g.v_ll_rms = j.at("v_ll_rms").get<double>();
  g.phase_offset = j.value("phase_offset", 0.0);
  g.freq_hz = j.value("freq_hz", 50.0);
  if (j.contains("per_phase_v_rms")) {
    const auto& arr = j.at("per_phase_v_rms");
    if (!arr.is_array() || arr.size() != 3) {
      throw std::invalid_argument("per_phase_v_rms must hold 3 values");
    }
    for (int i = 0; i < 3; ++i) {
      g.per_phase_v_rms[static_cast<std::size_t>(i)] =
          arr[static_cast<std::size_t>(i)].get<double>();
    }
  }
  if (j.contains("harmonics")) {
    for (const auto& hj : j.at("harmonics")) {
      Harmonic h;
      h.order = hj.at("order").get<int>();
      h.magnitude_pu = hj.at("magnitude_pu").get<double>();
      h.phase_rad = hj.value("phase_rad", 0.0);
      g.harmonics.push_back(h);
    }
  }
  return g;
}

Json command_to_json(const Command& c) {
  Json j;
  if (std::holds_alternative<Bypass>(c)) {
    j["type"] = "bypass";
  } else if (const auto* rc = std::get_if<RegulateCurrent>(&c)) {
    j["type"] = "regulate_current";
    j["i_rms"] = rc->i_rms;
    j["phase_rad"] = rc->phase_rad;
  } else if (const auto* iv = std::get_if<InjectVoltage>(&c)) {
    j["type"] = "inject_voltage";
    j["v_rms"] = iv->v_rms;
    j["phase_rad"] = iv->phase_rad;
  } else if (std::holds_alternative<CompensateQ>(c)) {
    j["type"] = "compensate_q";
  } else if (std::holds_alternative<CompensateP>(c)) {
    j["type"] = "compensate_p";
  } else if (const auto* bh = std::get_if<BlockHarmonics>(&c)) {
    j["type"] = "block_harmonics";
    j["orders"] = bh->orders;
  }
  return j;
}

Command command_from_json(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "bypass") return Bypass{};
  if (type == "regulate_current") {
    return RegulateCurrent{j.at("i_rms").get<double>(),
                           j.value("phase_rad", 0.0)};
  }
  if (type == "inject_voltage") {
    return InjectVoltage{j.at("v_rms").get<double>(),
                         j.value("phase_rad", 0.0)};
  }
  if (type == "compensate_q") return CompensateQ{};
  if (type == "compensate_p") return CompensateP{};
  if (type == "block_harmonics") {
    BlockHarmonics bh;
    bh.orders = j.at("orders").get<std::vector<int>>();
    return bh;
  }
  throw std::invalid_argument("unknown command type '" + type + "'");
}

}  // namespace

nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  j["topology"] = sc.topology == Topology::TwoGrid ? "two_grid" : "load_case";
  j["left"] = grid_to_json(sc.left);
  // "right" is a grid segment in two-grid topology and an R-L load otherwise.
  if (sc.topology == Topology::TwoGrid) {
    if (sc.right) j["right"] = grid_to_json(*sc.right);
  } else if (sc.load) {
    j["right"] = {{"r_ohm", sc.load->r_ohm}, {"x_ohm", sc.load->x_ohm}};
  }
  j["line"] = {{"r_ohm", sc.line.r_ohm}, {"x_ohm", sc.line.x_ohm}};
  j["filter"] = {{"l_h", sc.filter_l_h}};
  j["module"] = {{"v_dc_nom", sc.module.v_dc_nom},
                 {"f_sw_hz", sc.module.f_sw_hz},
                 {"c_dc_f", sc.module.c_dc_f},
                 {"v_dc_min", sc.module.v_dc_min},
                 {"llc",
                  {{"ratio", sc.module.llc.ratio},
                   {"efficiency", sc.module.llc.efficiency},
                   {"droop_w_per_v", sc.module.llc.droop_w_per_v}}}};
  j["controllers"] = {
      {"series",
       {{"kp", sc.control.kp},
        {"ki", sc.control.ki},
        {"sogi_k", sc.control.sogi_k},
        {"pll_bw_hz", sc.control.pll_bw_hz},
        {"harmonic_kr", sc.control.harmonic_kr},
        {"damping_r_ohm", sc.control.damping_r_ohm},
        {"allow_overmod", sc.control.allow_overmod}}},
      {"afe",
       {{"l_h", sc.afe.l_h},
        {"r_ohm", sc.afe.r_ohm},
        {"current_bw_hz", sc.afe.current_bw_hz},
        {"vdc_bw_hz", sc.afe.vdc_bw_hz},
        {"seq_filter_hz", sc.afe.seq_filter_hz},
        {"i_limit_a", sc.afe.i_limit_a},
        {"q_ref_var", sc.afe.q_ref_var}}},
      {"shared_link",
       {{"v_ref", sc.shared_link.v_ref}, {"c_f", sc.shared_link.c_f}}}};
  Json sched = Json::array();
  for (const auto& e : sc.schedule) {
    Json cmds = Json::array();
    for (const auto& c : e.cmd) cmds.push_back(command_to_json(c));
    sched.push_back({{"t", e.t}, {"commands", cmds}});
  }
  j["schedule"] = sched;
  j["sim"] = {{"dt", sc.sim.dt},
              {"t_end", sc.sim.t_end},
              {"fidelity",
               sc.sim.fidelity == Fidelity::Switched ? "switched" : "averaged"},
              {"record_decimation", sc.sim.record_decimation},
              {"seed", sc.sim.seed}};
  return j;
}

Scenario scenario_from_json(const nlohmann::ordered_json& j) {
  Scenario sc;
  try {
    sc.name = j.value("name", std::string("unnamed"));
    const std::string topo = j.at("topology").get<std::string>();
    if (topo == "two_grid") {
      sc.topology = Topology::TwoGrid;
    } else if (topo == "load_case") {
      sc.topology = Topology::LoadCase;
    } else {
      throw std::invalid_argument("unknown topology '" + topo + "'");
    }
    sc.left = grid_from_json(j.at("left"));
    if (j.contains("right")) {
      if (sc.topology == Topology::TwoGrid) {
        sc.right = grid_from_json(j.at("right"));
      } else {
        sc.load = RlLoad{j.at("right").at("r_ohm").get<double>(),
                         j.at("right").at("x_ohm").get<double>()};
      }
    }
    if (j.contains("line")) {
      sc.line = {j.at("line").at("r_ohm").get<double>(),
                 j.at("line").at("x_ohm").get<double>()};
    }
    if (j.contains("filter")) {
      sc.filter_l_h = j.at("filter").value("l_h", sc.filter_l_h);
    }
    if (j.contains("module")) {
      const auto& m = j.at("module");
      sc.module.v_dc_nom = m.value("v_dc_nom", sc.module.v_dc_nom);
      sc.module.f_sw_hz = m.value("f_sw_hz", sc.module.f_sw_hz);
      sc.module.c_dc_f = m.value("c_dc_f", sc.module.c_dc_f);
      sc.module.v_dc_min = m.value("v_dc_min", sc.module.v_dc_min);
      if (m.contains("llc")) {
        const auto& l = m.at("llc");
        sc.module.llc.ratio = l.value("ratio", sc.module.llc.ratio);
        sc.module.llc.efficiency = l.value("efficiency", sc.module.llc.efficiency);
        sc.module.llc.droop_w_per_v =
            l.value("droop_w_per_v", sc.module.llc.droop_w_per_v);
      }
    }
    if (j.contains("controllers")) {
      const auto& ctl = j.at("controllers");
      if (ctl.contains("series")) {
        const auto& c = ctl.at("series");
        sc.control.kp = c.value("kp", sc.control.kp);
        sc.control.ki = c.value("ki", sc.control.ki);
        sc.control.sogi_k = c.value("sogi_k", sc.control.sogi_k);
        sc.control.pll_bw_hz = c.value("pll_bw_hz", sc.control.pll_bw_hz);
        sc.control.harmonic_kr = c.value("harmonic_kr", sc.control.harmonic_kr);
        sc.control.damping_r_ohm =
            c.value("damping_r_ohm", sc.control.damping_r_ohm);
        sc.control.allow_overmod =
            c.value("allow_overmod", sc.control.allow_overmod);
      }
      if (ctl.contains("afe")) {
        const auto& a = ctl.at("afe");
        sc.afe.l_h = a.value("l_h", sc.afe.l_h);
        sc.afe.r_ohm = a.value("r_ohm", sc.afe.r_ohm);
        sc.afe.current_bw_hz = a.value("current_bw_hz", sc.afe.current_bw_hz);
        sc.afe.vdc_bw_hz = a.value("vdc_bw_hz", sc.afe.vdc_bw_hz);
        sc.afe.seq_filter_hz = a.value("seq_filter_hz", sc.afe.seq_filter_hz);
        sc.afe.i_limit_a = a.value("i_limit_a", sc.afe.i_limit_a);
        sc.afe.q_ref_var = a.value("q_ref_var", sc.afe.q_ref_var);
      }
      if (ctl.contains("shared_link")) {
        const auto& s = ctl.at("shared_link");
        sc.shared_link.v_ref = s.value("v_ref", sc.shared_link.v_ref);
        sc.shared_link.c_f = s.value("c_f", sc.shared_link.c_f);
      }
    }
    for (const auto& ej : j.at("schedule")) {
      ScheduleEntry e;
      e.t = ej.at("t").get<double>();
      if (ej.contains("commands")) {
        const auto& cmds = ej.at("commands");
        if (!cmds.is_array() || cmds.size() != 3) {
          throw std::invalid_argument("schedule entry needs 3 commands");
        }
        for (int ph = 0; ph < 3; ++ph) {
          e.cmd[static_cast<std::size_t>(ph)] =
              command_from_json(cmds[static_cast<std::size_t>(ph)]);
        }
      } else {
        const Command c = command_from_json(ej.at("command"));
        e.cmd = {c, c, c};
      }
      sc.schedule.push_back(e);
    }
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      sc.sim.dt = s.value("dt", sc.sim.dt);
      sc.sim.t_end = s.value("t_end", sc.sim.t_end);
      const std::string fid = s.value("fidelity", std::string("averaged"));
      if (fid == "switched") {
        sc.sim.fidelity = Fidelity::Switched;
      } else if (fid == "averaged") {
        sc.sim.fidelity = Fidelity::Averaged;
      } else {
        throw std::invalid_argument("unknown fidelity '" + fid + "'");
      }
      sc.sim.record_decimation = s.value("record_decimation", sc.sim.record_decimation);
      sc.sim.seed = s.value("seed", sc.sim.seed);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("scenario json: ") + ex.what());
  }
  sc.validate();
  return sc;
}

std::string scenario_to_string(const Scenario& sc) {
  return scenario_to_json(sc).dump(2) + "\n";
}

Scenario scenario_from_string(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("scenario json: ") + ex.what());
  }
  return scenario_from_json(j);
}

Scenario load_scenario_file(const std::string& path) {
  if (path.rfind("cases/", 0) == 0 && path.size() == 7) {
    return build_case(path[6]);
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_string(buf.str());
}

void save_scenario_file(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_string(sc);
}

}  // namespace difq

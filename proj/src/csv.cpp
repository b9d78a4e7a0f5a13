#include "difq/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace difq {

std::string format_sig9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move " + tmp + " into place");
  }
}

std::string trace_csv(const TraceSet& tr) {
  std::string out;
  out.reserve(tr.size() * 24 * 12 + 256);
  out += "# difq trace schema " + std::to_string(kTraceSchema) + "\n";
  out += "t";
  for (const char* p : {"a", "b", "c"}) {
    for (const char* ch : {"v_left_", "v_right_", "i_", "vm_", "vdcm_"}) {
      out += ",";
      out += ch;
      out += p;
    }
  }
  // The per-module power means are appended after the original column set so
  // that readers indexing by position keep working.
  out += ",p_src,q_src,p_mod,q_mod,vdc_shared,pm_a,pm_b,pm_c\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    out += format_sig9(tr.t[k]);
    for (std::size_t u = 0; u < 3; ++u) {
      out += "," + format_sig9(tr.v_left[u][k]);
      out += "," + format_sig9(tr.v_right[u][k]);
      out += "," + format_sig9(tr.i_line[u][k]);
      out += "," + format_sig9(tr.v_m[u][k]);
      out += "," + format_sig9(tr.v_dcm[u][k]);
    }
    out += "," + format_sig9(tr.p_src[k]);
    out += "," + format_sig9(tr.q_src[k]);
    out += "," + format_sig9(tr.p_mod[k]);
    out += "," + format_sig9(tr.q_mod[k]);
    out += "," + format_sig9(tr.v_dc_shared[k]);
    for (std::size_t u = 0; u < 3; ++u) out += "," + format_sig9(tr.p_m[u][k]);
    out += "\n";
  }
  return out;
}

std::string metrics_csv(const Metrics& m) {
  std::string out;
  out += "# difq metrics schema " + std::to_string(kMetricsSchema) + "\n";
  out +=
      "interval,t_start,t_end,phase,command,window_cycles,"
      "i_fund_a,i_fund_deg,v1_fund_v,v1_fund_deg,vm_fund_v,vm_fund_deg,"
      "i_rms_a,thd_i,p_mod_w,settle_s,settled,p_src_3ph_w,q_src_3ph_var\n";
  const char* phase_name[3] = {"a", "b", "c"};
  for (const auto& im : m.intervals) {
    for (std::size_t u = 0; u < 3; ++u) {
      out += std::to_string(im.index);
      out += "," + format_sig9(im.t_start);
      out += "," + format_sig9(im.t_end);
      out += ",";
      out += phase_name[u];
      out += "," + im.command[u];
      out += "," + std::to_string(im.window_cycles);
      out += "," + format_sig9(im.i[u].mag());
      out += "," + format_sig9(im.i[u].angle_deg());
      out += "," + format_sig9(im.v1[u].mag());
      out += "," + format_sig9(im.v1[u].angle_deg());
      out += "," + format_sig9(im.vm[u].mag());
      out += "," + format_sig9(im.vm[u].angle_deg());
      out += "," + format_sig9(im.i_rms[u]);
      out += "," + format_sig9(im.thd_i[u]);
      out += "," + format_sig9(im.p_mod_w[u]);
      out += "," + format_sig9(im.settle_s[u]);
      out += im.settled ? ",1" : ",0";
      out += "," + format_sig9(im.p_src_w);
      out += "," + format_sig9(im.q_src_var);
      out += "\n";
    }
  }
  return out;
}

std::string region_csv(const RegionBoundary& rb) {
  std::string out;
  out += rb.x_label + "," + rb.y_label + "\n";
  for (const auto& pt : rb.points) {
    out += format_sig9(pt[0]) + "," + format_sig9(pt[1]) + "\n";
  }
  return out;
}

std::string bertotti_sweep_csv(const BertottiParams& p, double p_inject_w,
                               double f_lo, double f_hi, int n) {
  if (!(f_lo > 0.0) || !(f_hi > f_lo) || n < 2) {
    throw std::invalid_argument("bertotti_sweep_csv: need 0 < f_lo < f_hi, n >= 2");
  }
  std::string out = "f_hz,p_hys_w,p_eddy_w,p_total_w,h\n";
  const double lr = std::log(f_hi / f_lo);
  for (int k = 0; k < n; ++k) {
    const double f =
        f_lo * std::exp(lr * static_cast<double>(k) / static_cast<double>(n - 1));
    const CoreLoss cl = bertotti_loss(p, f);
    const TransferGain tg = transformer_transfer(p_inject_w, p, f);
    out += format_sig9(f);
    out += "," + format_sig9(cl.hysteresis_w);
    out += "," + format_sig9(cl.eddy_w);
    out += "," + format_sig9(cl.total());
    out += "," + format_sig9(tg.h);
    out += "\n";
  }
  return out;
}

std::string loss_table_csv(const LossTable& t) {
  std::string out = "stage,path,watts,check_watts,check_disagrees\n";
  for (const auto& row : t.rows) {
    out += row.name;
    out += row.path == LossPath::Direct ? ",direct" : ",transformer";
    out += "," + format_sig9(row.watts);
    out += "," + (row.check_watts < 0.0 ? std::string("")
                                        : format_sig9(row.check_watts));
    out += row.check_disagrees ? ",1" : ",0";
    out += "\n";
  }
  out += "total,direct," + format_sig9(t.direct_total_w) + ",,0\n";
  out += "total,transformer," + format_sig9(t.transformer_total_w) + ",,0\n";
  return out;
}

std::string fault_csv(const FaultRatings& r) {
  std::string out = "i_nominal_a,i_short_a,i2t_a2s\n";
  out += format_sig9(r.i_nominal_a);
  out += "," + format_sig9(r.i_short_a);
  out += "," + format_sig9(r.i2t_a2s);
  out += "\n";
  return out;
}

void write_trace_csv(const std::string& path, const TraceSet& tr) {
  write_text_atomic(path, trace_csv(tr));
}

void write_metrics_csv(const std::string& path, const Metrics& m) {
  write_text_atomic(path, metrics_csv(m));
}

void write_region_csv(const std::string& path, const RegionBoundary& rb) {
  write_text_atomic(path, region_csv(rb));
}

}  // namespace difq

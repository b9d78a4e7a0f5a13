#pragma once
/**
 * @file csv.hpp
 * @brief Versioned CSV renderings of traces, metrics, envelope regions and
 *        loss tables. All numbers use 9 significant digits; files are
 *        written atomically (temp + rename).
 */

#include <string>

#include "difq/envelope.hpp"
#include "difq/loss.hpp"
#include "difq/metrics.hpp"
#include "difq/sim.hpp"

namespace difq {

inline constexpr int kTraceSchema = 1;
inline constexpr int kMetricsSchema = 1;

/// "%.9g" rendering used by every CSV writer.
std::string format_sig9(double x);

/// Write content to path via a temporary file and rename; throws
/// std::runtime_error when the target is not writable.
void write_text_atomic(const std::string& path, const std::string& content);

/// Column order: t, then per phase p in {a,b,c}: v_left_p, v_right_p, i_p,
/// vm_p, vdcm_p, then p_src, q_src, p_mod, q_mod, vdc_shared, and finally
/// the appended per-module power means pm_a, pm_b, pm_c. The first line is
/// a "# difq trace schema N" comment.
std::string trace_csv(const TraceSet& tr);

/// One row per interval and phase with fundamentals, rms, THD, module power
/// and settling columns; three-phase source means repeat on each phase row.
std::string metrics_csv(const Metrics& m);

std::string region_csv(const RegionBoundary& rb);

/// Core-loss sweep rows f_hz, p_hys_w, p_eddy_w, p_total_w, h for n
/// log-spaced frequencies in [f_lo, f_hi]; h is the transfer gain at the
/// given injected power.
std::string bertotti_sweep_csv(const BertottiParams& p, double p_inject_w,
                               double f_lo, double f_hi, int n);

std::string loss_table_csv(const LossTable& t);

std::string fault_csv(const FaultRatings& r);

void write_trace_csv(const std::string& path, const TraceSet& tr);
void write_metrics_csv(const std::string& path, const Metrics& m);
void write_region_csv(const std::string& path, const RegionBoundary& rb);

}  // namespace difq

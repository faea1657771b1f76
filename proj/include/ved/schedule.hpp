#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ved {

enum class ScheduleKind { Constant, Step, Linear, Cyclic };

/// Per-epoch weight schedule for beta or lambda.
///
/// constant: `value` throughout. step: `value` until the first breakpoint,
/// then the value of the last breakpoint whose epoch fraction has been
/// reached. linear: start -> end over the run. cyclic: the linear ramp
/// restarted `cycles` times.
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double value = 0.0;
  double start = 0.0;
  double end = 0.0;
  int cycles = 1;
  std::vector<std::pair<double, double>> steps;  // (epoch fraction, value)

  static Schedule constant(double v) {
    Schedule s;
    s.value = v;
    return s;
  }
  static Schedule linear(double from, double to) {
    Schedule s;
    s.kind = ScheduleKind::Linear;
    s.start = from;
    s.end = to;
    return s;
  }
  static Schedule cyclic(double from, double to, int n_cycles) {
    Schedule s = linear(from, to);
    s.kind = ScheduleKind::Cyclic;
    s.cycles = n_cycles;
    return s;
  }

  /// Throws ConfigError for negative weights or malformed parameters.
  void validate() const;
};

/// Weight at `epoch` in [0, total_epochs).
double schedule_value(const Schedule& s, int epoch, int total_epochs);

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

/// A bare number is a constant schedule; otherwise an object with "kind"
/// and the fields above ("steps" as [[fraction, value], ...]).
Schedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const Schedule& s);

/// Cosine decay from lr_init at step 0 to lr_final at step total_steps - 1.
double cosine_lr(long step, long total_steps, double lr_init, double lr_final);

}  // namespace ved

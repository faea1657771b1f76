#include "ved/schedule.hpp"

#include <cmath>
#include <numbers>

#include "ved/errors.hpp"

namespace ved {

void Schedule::validate() const {
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string("schedule ") + what + " must be a finite value >= 0");
  };
  switch (kind) {
    case ScheduleKind::Constant:
      non_negative(value, "value");
      break;
    case ScheduleKind::Step: {
      non_negative(value, "value");
      double prev = 0.0;
      for (const auto& [frac, v] : steps) {
        if (frac < prev || frac > 1.0) throw ConfigError("step schedule fractions must be ascending in [0, 1]");
        non_negative(v, "step value");
        prev = frac;
      }
      break;
    }
    case ScheduleKind::Cyclic:
      if (cycles < 1) throw ConfigError("cyclic schedule needs cycles >= 1");
      [[fallthrough]];
    case ScheduleKind::Linear:
      non_negative(start, "start");
      non_negative(end, "end");
      break;
  }
}

double schedule_value(const Schedule& s, int epoch, int total_epochs) {
  if (total_epochs < 1) throw ConfigError("schedule needs total_epochs >= 1");
  if (epoch < 0 || epoch >= total_epochs)
    throw ConfigError("schedule epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(total_epochs) + ")");
  const double t = static_cast<double>(epoch) / total_epochs;
  switch (s.kind) {
    case ScheduleKind::Constant:
      return s.value;
    case ScheduleKind::Step: {
      double v = s.value;
      for (const auto& [frac, val] : s.steps)
        if (t >= frac) v = val;
      return v;
    }
    case ScheduleKind::Linear:
      return s.start + (s.end - s.start) * t;
    case ScheduleKind::Cyclic: {
      const double period = static_cast<double>(total_epochs) / s.cycles;
      const double pos = std::fmod(static_cast<double>(epoch), period) / period;
      return s.start + (s.end - s.start) * pos;
    }
  }
  throw ConfigError("unknown schedule kind");
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "constant") return ScheduleKind::Constant;
  if (name == "step") return ScheduleKind::Step;
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "cyclic") return ScheduleKind::Cyclic;
  throw ConfigError("unknown schedule kind '" + name + "' (expected constant, step, linear or cyclic)");
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Step: return "step";
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::Cyclic: return "cyclic";
  }
  return "?";
}

Schedule schedule_from_json(const nlohmann::json& j) {
  if (j.is_number()) return Schedule::constant(j.get<double>());
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("schedule must be a number or an object with a 'kind'");
  Schedule s;
  try {
    s.kind = parse_schedule_kind(j.at("kind").get<std::string>());
    s.value = j.value("value", 0.0);
    s.start = j.value("start", 0.0);
    s.end = j.value("end", 0.0);
    s.cycles = j.value("cycles", 1);
    if (j.contains("steps"))
      for (const auto& p : j.at("steps")) s.steps.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed schedule: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json schedule_to_json(const Schedule& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case ScheduleKind::Constant:
      j["value"] = s.value;
      break;
    case ScheduleKind::Step:
      j["value"] = s.value;
      j["steps"] = nlohmann::json::array();
      for (const auto& [f, v] : s.steps) j["steps"].push_back({f, v});
      break;
    case ScheduleKind::Cyclic:
      j["cycles"] = s.cycles;
      [[fallthrough]];
    case ScheduleKind::Linear:
      j["start"] = s.start;
      j["end"] = s.end;
      break;
  }
  return j;
}

double cosine_lr(long step, long total_steps, double lr_init, double lr_final) {
  if (total_steps <= 1) return lr_init;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps - 1);
  return lr_final + 0.5 * (lr_init - lr_final) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace ved

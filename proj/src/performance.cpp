#include "rainbow/performance.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace rainbow {

using nlohmann::json;

namespace {
constexpr int kRecordVersion = 1;
}

char to_char(ModeId m) { return static_cast<char>('A' + static_cast<int>(m)); }

ModeId mode_from_string(std::string_view s) {
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'D') return static_cast<ModeId>(s[0] - 'A');
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

std::optional<DiatonicPitch> played_at(const PerformanceRecord& record, double t) {
  if (record.end_t && t >= static_cast<double>(*record.end_t)) return std::nullopt;
  auto it = std::upper_bound(record.events.begin(), record.events.end(), t,
                             [](double v, const PerformanceEvent& e) { return v < static_cast<double>(e.t); });
  if (it == record.events.begin()) return std::nullopt;
  return pitch_from_fingering(std::prev(it)->fingering);
}

void write_record(std::ostream& out, const PerformanceRecord& record) {
  json header = {
      {"type", "header"},
      {"version", kRecordVersion},
      {"piece_id", record.piece_id},
      {"mode", std::string(1, to_char(record.mode))},
      {"tempo", record.tempo},
      {"end_t", record.end_t ? json(*record.end_t) : json(nullptr)},
  };
  out << header.dump() << '\n';
  for (const auto& e : record.events) {
    out << json{{"t", e.t}, {"holes", e.fingering.to_string()}}.dump() << '\n';
  }
}

PerformanceRecord read_record(std::istream& in) {
  PerformanceRecord rec;
  std::string line;
  bool have_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        if (j.at("type") != "header") throw std::runtime_error("first line must be the header");
        if (j.at("version").get<int>() != kRecordVersion) throw std::runtime_error("unsupported record version");
        rec.piece_id = j.at("piece_id").get<std::string>();
        rec.mode = mode_from_string(j.at("mode").get<std::string>());
        rec.tempo = j.at("tempo").get<double>();
        if (!j.at("end_t").is_null()) rec.end_t = j.at("end_t").get<Millis>();
        have_header = true;
        continue;
      }
      PerformanceEvent e{j.at("t").get<Millis>(), FingeringState::from_string(j.at("holes").get<std::string>())};
      if (!rec.events.empty() && e.t < rec.events.back().t) {
        throw std::runtime_error("event times go backwards");
      }
      rec.events.push_back(e);
    } catch (const std::exception& ex) {
      throw std::runtime_error("performance record line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (!have_header) throw std::runtime_error("performance record has no header");
  if (rec.end_t && !rec.events.empty() && *rec.end_t < rec.events.back().t) {
    throw std::runtime_error("performance record ends before its last event");
  }
  return rec;
}

std::string record_to_jsonl(const PerformanceRecord& record) {
  std::ostringstream out;
  write_record(out, record);
  return out.str();
}

PerformanceRecord record_from_jsonl(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_record(in);
}

}  // namespace rainbow

#include "rainbow/protocol.hpp"

#include <array>

namespace rainbow {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "hello", "start", "fingering", "control", "frame", "note-result", "exam-result", "review", "error",
};

json segment_to_json(const TrackSegment& s, double tempo) {
  return {{"start_ms", s.start_ms},
          {"end_ms", s.end_ms},
          {"start_beats", s.start_beats(tempo)},
          {"end_beats", s.end_beats(tempo)},
          {"pitch", s.pitch ? json(std::string(1, s.pitch->letter())) : json(nullptr)},
          {"row", s.pitch ? json(row_of(*s.pitch)) : json(nullptr)},
          {"color", s.pitch ? json(color_of(*s.pitch).hex()) : json(nullptr)}};
}

}  // namespace

std::string_view to_string(MessageKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }

std::optional<MessageKind> message_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<MessageKind>(i);
  }
  return std::nullopt;
}

bool client_may_send(MessageKind k) {
  return k == MessageKind::Hello || k == MessageKind::Start || k == MessageKind::Fingering ||
         k == MessageKind::Control;
}

std::string encode(const Message& m) {
  json j = {{"kind", to_string(m.kind)}, {"seq", m.seq}, {"payload", m.payload}};
  return j.dump();
}

Message decode(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("message is not valid JSON");
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) throw ProtocolError("message has no kind");
  auto k = message_kind_from_string(kind->get<std::string>());
  if (!k) throw ProtocolError("unknown message kind '" + kind->get<std::string>() + "'");
  auto seq = j.find("seq");
  if (seq == j.end() || !seq->is_number_integer()) throw ProtocolError("message has no integer seq");
  Message m;
  m.kind = *k;
  m.seq = seq->get<std::int64_t>();
  if (auto p = j.find("payload"); p != j.end()) {
    if (!p->is_object()) throw ProtocolError("payload must be an object");
    m.payload = *p;
  }
  return m;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

json piece_to_json(const Piece& piece) {
  json notes = json::array();
  for (const auto& n : piece.notes) {
    notes.push_back({{"pitch", std::string(1, n.pitch.letter())},
                     {"onset", n.onset},
                     {"duration", n.duration},
                     {"row", row_of(n.pitch)},
                     {"color", color_of(n.pitch).hex()}});
  }
  return {{"id", piece.id},
          {"title", piece.title},
          {"tempo", piece.default_tempo},
          {"beats_per_measure", piece.beats_per_measure},
          {"ticks_per_beat", kTicksPerBeat},
          {"notes", notes}};
}

Piece piece_from_json(const json& j) {
  Piece p;
  p.id = j.at("id").get<std::string>();
  p.title = j.value("title", std::string());
  p.default_tempo = j.at("tempo").get<double>();
  p.beats_per_measure = j.at("beats_per_measure").get<int>();
  for (const auto& n : j.at("notes")) {
    const auto letter = n.at("pitch").get<std::string>();
    if (letter.size() != 1) throw std::invalid_argument("bad pitch '" + letter + "'");
    p.notes.push_back(Note{DiatonicPitch::from_letter(letter[0]), n.at("onset").get<Ticks>(),
                           n.at("duration").get<Ticks>()});
  }
  return p;
}

std::string_view to_string(NoteStatus s) {
  switch (s) {
    case NoteStatus::Pending: return "pending";
    case NoteStatus::InProgress: return "in-progress";
    case NoteStatus::Correct: return "correct";
    case NoteStatus::Incorrect: return "incorrect";
  }
  return "pending";
}

std::string_view to_string(Arrow a) {
  switch (a) {
    case Arrow::None: return "none";
    case Arrow::Up: return "up";
    case Arrow::Down: return "down";
  }
  return "none";
}

json frame_to_json(const FeedbackFrame& frame) {
  json statuses = json::array();
  for (auto s : frame.statuses) statuses.push_back(to_string(s));
  json mask = nullptr;
  if (frame.mask) {
    const auto& m = *frame.mask;
    mask = {{"played_row", m.played_row},
            {"target_row", m.target_row},
            {"arrow", to_string(m.arrow)},
            {"span_begin_beats", m.span_begin_beats},
            {"span_end_beats", m.span_end_beats}};
  }
  return {{"t_ms", frame.t_ms},
          {"playhead_beats", frame.playhead_beats ? json(*frame.playhead_beats) : json(nullptr)},
          {"statuses", statuses},
          {"mask", mask}};
}

json click_to_json(const MetronomeClick& click) {
  return {{"beat", click.beat}, {"t_ms", click.t_ms}, {"downbeat", click.downbeat}};
}

json gate_decision_to_json(const GateDecision& d) {
  return {{"note_index", d.note_index},
          {"t_ms", d.t},
          {"played", std::string(1, d.played.letter())},
          {"correct", d.correct}};
}

json review_to_json(const ReviewDocument& review) {
  json truth = json::array(), played = json::array(), correct = json::array();
  for (const auto& s : review.ground_truth) truth.push_back(segment_to_json(s, review.tempo));
  for (const auto& s : review.played) played.push_back(segment_to_json(s, review.tempo));
  for (bool c : review.note_correct) correct.push_back(c);
  return {{"piece_id", review.piece_id},
          {"tempo", review.tempo},
          {"ground_truth", truth},
          {"played", played},
          {"note_correct", correct}};
}

}  // namespace rainbow

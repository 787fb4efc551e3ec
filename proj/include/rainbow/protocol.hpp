#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rainbow/session.hpp"

namespace rainbow {

// Wire format between the UI and the service: newline-delimited JSON
// objects {"kind": ..., "seq": n, "payload": {...}}. Each side numbers its own
// messages; numbers strictly increase per connection.

inline constexpr int kProtocolVersion = 1;

enum class MessageKind : std::uint8_t {
  Hello,
  Start,
  Fingering,
  Control,  // stop the running session, skip a song, or quit
  Frame,
  NoteResult,
  ExamResult,
  Review,
  Error,
};

std::string_view to_string(MessageKind k);
std::optional<MessageKind> message_kind_from_string(std::string_view s);
/// Kinds a client may send: hello, start, fingering, control.
bool client_may_send(MessageKind k);

struct Message {
  MessageKind kind = MessageKind::Error;
  std::int64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One JSON object, no trailing newline.
std::string encode(const Message& m);
/// Throws ProtocolError on malformed JSON, a missing or unknown kind, or a
/// missing integer seq.
Message decode(std::string_view line);
/// Splits on newlines, dropping blank lines.
std::vector<std::string> split_lines(std::string_view text);

nlohmann::json piece_to_json(const Piece& piece);
Piece piece_from_json(const nlohmann::json& j);
nlohmann::json frame_to_json(const FeedbackFrame& frame);
nlohmann::json click_to_json(const MetronomeClick& click);
nlohmann::json gate_decision_to_json(const GateDecision& d);
nlohmann::json review_to_json(const ReviewDocument& review);

std::string_view to_string(NoteStatus s);
std::string_view to_string(Arrow a);

}  // namespace rainbow

#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rainbow/piece_format.hpp"
#include "rainbow/protocol.hpp"
#include "rainbow/subject_store.hpp"

namespace rainbow {

/// Shared by every connection of one running service.
class ServiceContext {
public:
  /// Pieces are arranged in alternating-difficulty order once, here.
  ServiceContext(Curriculum curriculum, std::filesystem::path data_dir, std::uint64_t seed,
                 SessionConfig session = {});

  const std::string& curriculum_id() const { return curriculum_id_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<std::string> piece_order() const;
  const Piece& piece(const std::string& id) const;
  SubjectStore& store() { return store_; }
  std::uint64_t seed() const { return seed_; }
  const SessionConfig& session_config() const { return session_; }

  /// The randomized exam for a subject's song is fixed by (seed, subject,
  /// position), so a retaken exam after a disconnect is the same piece.
  Piece randomized_exam(const std::string& subject_id, std::size_t position) const;

  /// One connection per subject at a time.
  bool claim(const std::string& subject_id);
  void release(const std::string& subject_id);

private:
  std::string curriculum_id_;
  std::vector<Piece> pieces_;
  SubjectStore store_;
  std::uint64_t seed_;
  SessionConfig session_;
  std::mutex mu_;
  std::set<std::string> active_;
};

enum class SessionPurpose : std::uint8_t { Practice, Exam };

/// One client connection. The transport feeds it text lines and clock ticks
/// in server milliseconds and sends back whatever messages it returns.
class Connection {
public:
  explicit Connection(ServiceContext& ctx);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  /// The greeting sent on connect.
  std::vector<Message> open(Millis now);
  /// One incoming text frame; may hold several newline-separated messages.
  std::vector<Message> receive(std::string_view text, Millis now);
  std::vector<Message> handle(const Message& m, Millis now);
  /// Advances the live session's clock: frames, hold decisions, the
  /// practice budget, and the end of a timed piece.
  std::vector<Message> tick(Millis now);
  /// Transport closed. A live session is saved unfinished and logged as
  /// interrupted; the subject can pick up from there on the next hello.
  void close(Millis now);

  bool session_live() const { return live_.has_value(); }
  const std::optional<SubjectProgress>& progress() const { return progress_; }

private:
  struct Live {
    Session session;
    SessionPurpose purpose;
    ExamKind exam_kind = ExamKind::Pre;
    Millis started_at = 0;                // server clock
    std::optional<Millis> client_offset;  // session time = client t + offset
    Millis budget_ms = 0;                 // practice only
    std::size_t gate_seen = 0;
  };

  Message make(MessageKind kind, nlohmann::json payload);
  Message error(const std::string& what, std::optional<std::int64_t> ref = std::nullopt);
  nlohmann::json hello_payload() const;

  void on_hello(const Message& m, std::vector<Message>& out);
  void on_start(const Message& m, Millis now, std::vector<Message>& out);
  void on_fingering(const Message& m, Millis now, std::vector<Message>& out);
  void on_control(const Message& m, Millis now, std::vector<Message>& out);

  Millis session_time(Millis now) const;
  void emit_clock(const ClockUpdate& u, std::vector<Message>& out);
  void emit_gate(std::vector<Message>& out);
  void advance(Millis session_t, std::vector<Message>& out);
  void finalize(std::vector<Message>& out);
  void log(const nlohmann::json& event);

  ServiceContext& ctx_;
  std::int64_t seq_out_ = 0;
  std::optional<std::int64_t> seq_in_;
  std::optional<SubjectProgress> progress_;
  std::optional<Live> live_;
};

}  // namespace rainbow

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "conflictlens/service/session.hpp"

namespace conflictlens::service {

// File-backed event log per session:
//   <root>/<session-id>/events.jsonl   one SessionEvent per line, fsynced
//   <root>/<session-id>/snapshot.json  {"last_seq", "session"}, atomic rename
//
// The log is the source of truth. A snapshot only shortens recovery, so a
// missing, stale or corrupt snapshot falls back to replaying the log.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path root, std::size_t snapshot_interval = 8);

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] bool exists(const std::string& session_id) const;
  [[nodiscard]] std::vector<std::string> list() const;

  // Appends the event, then writes a snapshot of `after` every
  // snapshot_interval events. Throws StorageError.
  void append(const std::string& session_id, const SessionEvent& event, const Session& after);

  // Events in order. An unterminated or unparsable final line (a torn write)
  // is dropped; damage anywhere else throws StorageError.
  [[nodiscard]] std::vector<SessionEvent> read_events(const std::string& session_id) const;

  // Snapshot plus log tail. Cuts a torn tail off the file so later appends
  // start on a clean line. Throws SessionNotFound or StorageError.
  Session load(const std::string& session_id);

  // Raw events.jsonl content with any torn tail removed.
  [[nodiscard]] std::string export_log(const std::string& session_id) const;

  // Validates the log by replaying it and stores it under its session id.
  // Throws InvalidInput for a bad log and StorageError if the id exists.
  Session import_log(const std::string& jsonl);

  // Test seam: runs after the event is durable and before the snapshot.
  std::function<void(const std::string& session_id, std::int64_t seq)> after_append_hook;

  // Session ids are path components, so only [A-Za-z0-9_-]{1,64} is accepted.
  static bool valid_session_id(const std::string& id) noexcept;

 private:
  [[nodiscard]] std::filesystem::path dir(const std::string& session_id) const;
  void write_snapshot(const std::string& session_id, const Session& s) const;

  std::filesystem::path root_;
  std::size_t snapshot_interval_;
};

std::vector<SessionEvent> parse_event_log(const std::string& jsonl, std::size_t* valid_bytes = nullptr);

}  // namespace conflictlens::service

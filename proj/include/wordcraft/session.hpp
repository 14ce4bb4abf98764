#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "wordcraft/lexicon.hpp"
#include "wordcraft/model.hpp"

namespace wordcraft {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual int64_t now_ms() = 0;
};

class SystemClock : public Clock {
 public:
  int64_t now_ms() override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
};

/// Deterministic clock: returns start, start+step, start+2*step, ...
class StepClock : public Clock {
 public:
  explicit StepClock(int64_t start = 1700000000000, int64_t step = 1) : next_(start), step_(step) {}
  int64_t now_ms() override { return next_.fetch_add(step_); }

 private:
  std::atomic<int64_t> next_;
  int64_t step_;
};

struct SessionEvent {
  int64_t seq = 0;
  std::string kind;
  json payload;
  int64_t at = 0;
};
void to_json(json& j, const SessionEvent& e);
void from_json(const json& j, SessionEvent& e);

/// Event-sourced learning session. The event log is the source of truth; the
/// state is the fold of the log through apply_event().
class Session {
 public:
  Session() = default;

  /// Throws kUnknownWord / kUnknownSense.
  static Session create(const Lexicon& lexicon, std::string session_id, std::string_view word_id,
                        std::string_view sense_id, std::shared_ptr<Clock> clock = nullptr);

  /// Rebuilds a session by folding `events` from scratch.
  static Session replay(const std::vector<SessionEvent>& events, std::shared_ptr<Clock> clock = nullptr);

  const SessionState& state() const { return state_; }
  const std::vector<SessionEvent>& events() const { return events_; }
  const std::string& id() const { return state_.session_id; }
  bool closed() const { return state_.stage == Stage::kRecorded; }

  /// Applies the event to a copy of the state and, on success, swaps it in and
  /// appends the event. Throws kSessionClosed once recorded.
  const SessionEvent& commit(std::string kind, json payload);

  int64_t now() const;
  void set_clock(std::shared_ptr<Clock> clock) { clock_ = std::move(clock); }

  /// Next object id with the given prefix, `offset` positions ahead.
  std::string next_id(std::string_view prefix, int offset = 0) const;

 private:
  SessionState state_;
  std::vector<SessionEvent> events_;
  std::shared_ptr<Clock> clock_;
};

/// The reducer: folds one event into the state. Throws module errors when
/// the event is not applicable.
void apply_event(SessionState& state, const SessionEvent& event);

/// Adds `delta_ms` of client-reported active time. Throws kSessionClosed,
/// kInvalidArgument for negative deltas.
void tick_active(Session& session, int64_t delta_ms);

/// Replacement content for an already selected keyword.
struct KeywordReplacement {
  std::string keyword;
  std::string explanation;
  std::string origin = "user";  // user | card
  std::string card_id;
  std::vector<std::string> chain;
};

/// Renames a selected keyword everywhere it is shown: the choice, its concept
/// node label and its semantic-tree anchor. Canvas tags and links refer to the
/// node by id and so follow automatically; topology is untouched. The previous
/// choice is kept in the event payload. Throws kUnknownKeyword.
KeywordChoice propagate_keyword_change(Session& session, std::string_view old_keyword_id,
                                       const KeywordReplacement& replacement);

/// Serialized session snapshot ({"state":..., "event_count":...}).
json snapshot_json(const Session& session);

/// Owns live sessions with a single writer per session and optional
/// persistence to `<data_dir>/sessions/<id>/{events.jsonl,snapshot.json}`.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt,
                        std::shared_ptr<Clock> clock = nullptr);

  /// Replays every persisted session under the data dir.
  void load_all();

  std::string create(const Lexicon& lexicon, std::string_view word_id, std::string_view sense_id);

  /// Runs `fn` with exclusive access to the session, then persists any events
  /// it committed (even when `fn` throws after committing).
  template <class Fn>
  auto with_session(const std::string& session_id, Fn&& fn) -> decltype(fn(std::declval<Session&>())) {
    auto slot = find_slot(session_id);
    std::lock_guard lock(slot->mu);
    const size_t before = slot->session.events().size();
    struct Persist {
      SessionStore* store;
      Slot* slot;
      size_t before;
      ~Persist() { store->persist(*slot, before); }
    } persist{this, slot.get(), before};
    return fn(slot->session);
  }

  /// Copy of the latest committed state.
  Session snapshot(const std::string& session_id) const;
  std::vector<std::string> ids() const;
  bool contains(const std::string& session_id) const;
  std::shared_ptr<Clock> clock() const { return clock_; }
  const std::optional<std::filesystem::path>& data_dir() const { return data_dir_; }

 private:
  struct Slot {
    std::mutex mu;
    Session session;
    size_t persisted = 0;
  };

  std::shared_ptr<Slot> find_slot(const std::string& session_id) const;
  void persist(Slot& slot, size_t before);

  std::optional<std::filesystem::path> data_dir_;
  std::shared_ptr<Clock> clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
  int next_seq_ = 1;
};

}  // namespace wordcraft

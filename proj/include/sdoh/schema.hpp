#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sdoh {

// ---------------------------------------------------------------------------
// Label enumerations. Canonical serialization names are PascalCase for event
// and argument types and lower case with spaces for subtype values.
// ---------------------------------------------------------------------------

enum class EventType { Alcohol, Drug, Tobacco, Employment, LivingStatus };

inline constexpr std::array<EventType, 5> kEventTypes = {
    EventType::Alcohol, EventType::Drug, EventType::Tobacco,
    EventType::Employment, EventType::LivingStatus};

enum class SpanOnlyArg { Amount, Duration, Frequency, History, Type, Method };

inline constexpr std::array<SpanOnlyArg, 6> kSpanOnlyArgs = {
    SpanOnlyArg::Amount,  SpanOnlyArg::Duration, SpanOnlyArg::Frequency,
    SpanOnlyArg::History, SpanOnlyArg::Type,     SpanOnlyArg::Method};

enum class LabeledArg { StatusTime, StatusEmploy, TypeLiving };

inline constexpr std::array<LabeledArg, 3> kLabeledArgs = {
    LabeledArg::StatusTime, LabeledArg::StatusEmploy, LabeledArg::TypeLiving};

/// Subtype values across all three labeled-argument sets. Null is the shared
/// negative label; every other value belongs to exactly one LabeledArg.
enum class Subtype {
  Null,
  // StatusTime
  None,
  Current,
  Past,
  // StatusEmploy
  Employed,
  Unemployed,
  Retired,
  OnDisability,
  Student,
  Homemaker,
  // TypeLiving
  Alone,
  WithFamily,
  WithOthers,
  Homeless,
};

std::string_view to_string(EventType t);
std::string_view to_string(SpanOnlyArg a);
std::string_view to_string(LabeledArg a);
std::string_view to_string(Subtype s);

std::optional<EventType> parse_event_type(std::string_view name);
std::optional<SpanOnlyArg> parse_span_only_arg(std::string_view name);
std::optional<LabeledArg> parse_labeled_arg(std::string_view name);
std::optional<Subtype> parse_subtype(std::string_view name);

/// Labeled-argument set a subtype value belongs to; nullopt for Null.
std::optional<LabeledArg> labeled_arg_of(Subtype s);

// ---------------------------------------------------------------------------
// Annotation data model. All types are immutable values; offsets are
// character positions in the document's social-history section text.
// ---------------------------------------------------------------------------

struct Span {
  int start = 0;
  int end = 0;  // exclusive

  int length() const { return end - start; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  int overlap_length(const Span& o) const {
    int lo = start > o.start ? start : o.start;
    int hi = end < o.end ? end : o.end;
    return hi > lo ? hi - lo : 0;
  }
  auto operator<=>(const Span&) const = default;
};

struct Trigger {
  EventType type = EventType::Alcohol;
  Span span;
  auto operator<=>(const Trigger&) const = default;
};

/// Tagged union of the two argument categories.
struct Argument {
  enum class Kind { SpanOnly, Labeled };

  Kind kind = Kind::SpanOnly;
  SpanOnlyArg span_only_type = SpanOnlyArg::Amount;  // when kind == SpanOnly
  LabeledArg labeled_type = LabeledArg::StatusTime;  // when kind == Labeled
  Subtype subtype = Subtype::Null;                   // when kind == Labeled
  Span span;

  static Argument span_only(SpanOnlyArg type, Span s) {
    Argument a;
    a.kind = Kind::SpanOnly;
    a.span_only_type = type;
    a.span = s;
    return a;
  }
  static Argument labeled(LabeledArg type, Subtype sub, Span s) {
    Argument a;
    a.kind = Kind::Labeled;
    a.labeled_type = type;
    a.subtype = sub;
    a.span = s;
    return a;
  }

  auto operator<=>(const Argument&) const = default;
};

struct Event {
  Trigger trigger;
  std::vector<Argument> arguments;
  /// Set when the required labeled argument for the event type is absent.
  /// Incomplete events are retained so downstream scoring still sees them.
  bool incomplete = false;

  auto operator<=>(const Event&) const = default;
};

/// Entity span not attached to any event; `type` is the canonical name of an
/// event type, span-only argument type, or labeled argument type.
struct OrphanEntity {
  std::string type;
  Span span;
  auto operator<=>(const OrphanEntity&) const = default;
};

struct AnnotationSet {
  std::string document_id;
  std::vector<Event> events;
  std::vector<OrphanEntity> orphans;

  bool operator==(const AnnotationSet&) const = default;
};

// ---------------------------------------------------------------------------
// Label inventory: the entity, relation, and subtype label spaces that drive
// the model heads and validation. Entity label 0 and subtype label 0 are the
// null (negative) labels.
// ---------------------------------------------------------------------------

class LabelInventory {
 public:
  static constexpr int kRelationLabelCount = 2;  // {null, has}
  static constexpr int kRelationHas = 1;

  explicit LabelInventory(bool include_method = false);

  bool include_method() const { return include_method_; }

  const std::vector<std::string>& entity_labels() const {
    return entity_labels_;
  }
  int entity_label_count() const {
    return static_cast<int>(entity_labels_.size());
  }

  int entity_label(EventType t) const;
  /// -1 when the argument type is not in the inventory (Method without the
  /// include_method flag).
  int entity_label(SpanOnlyArg a) const;

  std::optional<EventType> event_type_of(int entity_label) const;
  std::optional<SpanOnlyArg> span_only_of(int entity_label) const;

  const std::vector<Subtype>& subtype_set(LabeledArg v) const {
    return subtype_sets_[static_cast<int>(v)];
  }
  int subtype_count(LabeledArg v) const {
    return static_cast<int>(subtype_set(v).size());
  }
  /// Index of a subtype within its head's label set; -1 if foreign.
  int subtype_index(LabeledArg v, Subtype s) const;

  /// Stable hash over label names and flags; embedded in checkpoints so a
  /// model cannot be loaded against a different label space.
  std::uint64_t hash() const;

 private:
  bool include_method_;
  std::vector<std::string> entity_labels_;
  std::array<std::vector<Subtype>, 3> subtype_sets_;
};

/// Per-event-type argument compatibility: which span-only arguments the event
/// may carry and which labeled argument it requires.
struct EventCompat {
  LabeledArg required_labeled = LabeledArg::StatusTime;
  std::vector<SpanOnlyArg> allowed_span_only;

  bool allows(SpanOnlyArg a) const;
};

EventCompat compatibility(EventType t, const LabelInventory& inv);

/// Full compatibility table in event-type order.
std::array<EventCompat, 5> compatibility_table(const LabelInventory& inv);

LabeledArg required_labeled_arg(EventType t);

/// Pure rule check; returns one message per violated rule, empty when the
/// event conforms to the inventory.
std::vector<std::string> validate_event(const Event& e,
                                        const LabelInventory& inv);

/// True when the event carries its required labeled argument.
bool has_required_labeled_arg(const Event& e);

}  // namespace sdoh

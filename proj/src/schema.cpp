#include "sdoh/schema.hpp"

#include <algorithm>
#include <string>

namespace sdoh {

std::string_view to_string(EventType t) {
  switch (t) {
    case EventType::Alcohol: return "Alcohol";
    case EventType::Drug: return "Drug";
    case EventType::Tobacco: return "Tobacco";
    case EventType::Employment: return "Employment";
    case EventType::LivingStatus: return "LivingStatus";
  }
  return "?";
}

std::string_view to_string(SpanOnlyArg a) {
  switch (a) {
    case SpanOnlyArg::Amount: return "Amount";
    case SpanOnlyArg::Duration: return "Duration";
    case SpanOnlyArg::Frequency: return "Frequency";
    case SpanOnlyArg::History: return "History";
    case SpanOnlyArg::Type: return "Type";
    case SpanOnlyArg::Method: return "Method";
  }
  return "?";
}

std::string_view to_string(LabeledArg a) {
  switch (a) {
    case LabeledArg::StatusTime: return "StatusTime";
    case LabeledArg::StatusEmploy: return "StatusEmploy";
    case LabeledArg::TypeLiving: return "TypeLiving";
  }
  return "?";
}

std::string_view to_string(Subtype s) {
  switch (s) {
    case Subtype::Null: return "null";
    case Subtype::None: return "none";
    case Subtype::Current: return "current";
    case Subtype::Past: return "past";
    case Subtype::Employed: return "employed";
    case Subtype::Unemployed: return "unemployed";
    case Subtype::Retired: return "retired";
    case Subtype::OnDisability: return "on disability";
    case Subtype::Student: return "student";
    case Subtype::Homemaker: return "homemaker";
    case Subtype::Alone: return "alone";
    case Subtype::WithFamily: return "with family";
    case Subtype::WithOthers: return "with others";
    case Subtype::Homeless: return "homeless";
  }
  return "?";
}

std::optional<EventType> parse_event_type(std::string_view name) {
  for (EventType t : kEventTypes) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<SpanOnlyArg> parse_span_only_arg(std::string_view name) {
  for (SpanOnlyArg a : kSpanOnlyArgs) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<LabeledArg> parse_labeled_arg(std::string_view name) {
  for (LabeledArg a : kLabeledArgs) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::optional<Subtype> parse_subtype(std::string_view name) {
  for (int i = static_cast<int>(Subtype::Null);
       i <= static_cast<int>(Subtype::Homeless); ++i) {
    Subtype s = static_cast<Subtype>(i);
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<LabeledArg> labeled_arg_of(Subtype s) {
  switch (s) {
    case Subtype::Null: return std::nullopt;
    case Subtype::None:
    case Subtype::Current:
    case Subtype::Past: return LabeledArg::StatusTime;
    case Subtype::Employed:
    case Subtype::Unemployed:
    case Subtype::Retired:
    case Subtype::OnDisability:
    case Subtype::Student:
    case Subtype::Homemaker: return LabeledArg::StatusEmploy;
    case Subtype::Alone:
    case Subtype::WithFamily:
    case Subtype::WithOthers:
    case Subtype::Homeless: return LabeledArg::TypeLiving;
  }
  return std::nullopt;
}

LabelInventory::LabelInventory(bool include_method)
    : include_method_(include_method) {
  entity_labels_.emplace_back("null");
  for (EventType t : kEventTypes) entity_labels_.emplace_back(to_string(t));
  for (SpanOnlyArg a : kSpanOnlyArgs) {
    if (a == SpanOnlyArg::Method && !include_method_) continue;
    entity_labels_.emplace_back(to_string(a));
  }

  subtype_sets_[static_cast<int>(LabeledArg::StatusTime)] = {
      Subtype::Null, Subtype::None, Subtype::Current, Subtype::Past};
  subtype_sets_[static_cast<int>(LabeledArg::StatusEmploy)] = {
      Subtype::Null,         Subtype::Employed, Subtype::Unemployed,
      Subtype::Retired,      Subtype::OnDisability,
      Subtype::Student,      Subtype::Homemaker};
  subtype_sets_[static_cast<int>(LabeledArg::TypeLiving)] = {
      Subtype::Null, Subtype::Alone, Subtype::WithFamily, Subtype::WithOthers,
      Subtype::Homeless};
}

int LabelInventory::entity_label(EventType t) const {
  return 1 + static_cast<int>(t);
}

int LabelInventory::entity_label(SpanOnlyArg a) const {
  if (a == SpanOnlyArg::Method && !include_method_) return -1;
  return 1 + static_cast<int>(kEventTypes.size()) + static_cast<int>(a);
}

std::optional<EventType> LabelInventory::event_type_of(int entity_label) const {
  int i = entity_label - 1;
  if (i < 0 || i >= static_cast<int>(kEventTypes.size())) return std::nullopt;
  return kEventTypes[static_cast<std::size_t>(i)];
}

std::optional<SpanOnlyArg> LabelInventory::span_only_of(int entity_label) const {
  int i = entity_label - 1 - static_cast<int>(kEventTypes.size());
  int count = include_method_ ? 6 : 5;
  if (i < 0 || i >= count) return std::nullopt;
  return kSpanOnlyArgs[static_cast<std::size_t>(i)];
}

int LabelInventory::subtype_index(LabeledArg v, Subtype s) const {
  const auto& set = subtype_set(v);
  auto it = std::find(set.begin(), set.end(), s);
  if (it == set.end()) return -1;
  return static_cast<int>(it - set.begin());
}

std::uint64_t LabelInventory::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= '\x1f';
    h *= 0x100000001b3ULL;
  };
  for (const auto& name : entity_labels_) mix(name);
  for (LabeledArg v : kLabeledArgs) {
    mix(to_string(v));
    for (Subtype s : subtype_set(v)) mix(to_string(s));
  }
  return h;
}

bool EventCompat::allows(SpanOnlyArg a) const {
  return std::find(allowed_span_only.begin(), allowed_span_only.end(), a) !=
         allowed_span_only.end();
}

LabeledArg required_labeled_arg(EventType t) {
  switch (t) {
    case EventType::Alcohol:
    case EventType::Drug:
    case EventType::Tobacco: return LabeledArg::StatusTime;
    case EventType::Employment: return LabeledArg::StatusEmploy;
    case EventType::LivingStatus: return LabeledArg::TypeLiving;
  }
  return LabeledArg::StatusTime;
}

EventCompat compatibility(EventType t, const LabelInventory& inv) {
  EventCompat c;
  c.required_labeled = required_labeled_arg(t);
  switch (t) {
    case EventType::Alcohol:
    case EventType::Drug:
    case EventType::Tobacco:
      c.allowed_span_only = {SpanOnlyArg::Amount, SpanOnlyArg::Duration,
                             SpanOnlyArg::Frequency, SpanOnlyArg::History,
                             SpanOnlyArg::Type};
      if (inv.include_method()) c.allowed_span_only.push_back(SpanOnlyArg::Method);
      break;
    case EventType::Employment:
      c.allowed_span_only = {SpanOnlyArg::Duration, SpanOnlyArg::History,
                             SpanOnlyArg::Type};
      break;
    case EventType::LivingStatus:
      c.allowed_span_only = {SpanOnlyArg::Duration, SpanOnlyArg::History};
      break;
  }
  return c;
}

std::array<EventCompat, 5> compatibility_table(const LabelInventory& inv) {
  std::array<EventCompat, 5> table;
  for (EventType t : kEventTypes) {
    table[static_cast<std::size_t>(t)] = compatibility(t, inv);
  }
  return table;
}

bool has_required_labeled_arg(const Event& e) {
  LabeledArg req = required_labeled_arg(e.trigger.type);
  for (const Argument& a : e.arguments) {
    if (a.kind == Argument::Kind::Labeled && a.labeled_type == req) return true;
  }
  return false;
}

std::vector<std::string> validate_event(const Event& e,
                                        const LabelInventory& inv) {
  std::vector<std::string> violations;
  const EventCompat compat = compatibility(e.trigger.type, inv);
  const std::string etype{to_string(e.trigger.type)};

  if (e.trigger.span.length() <= 0) {
    violations.push_back("trigger span is empty");
  }

  std::array<int, 3> labeled_count = {0, 0, 0};
  for (const Argument& a : e.arguments) {
    if (a.span.length() <= 0) {
      violations.push_back("argument span is empty");
    }
    if (a.kind == Argument::Kind::SpanOnly) {
      if (!compat.allows(a.span_only_type)) {
        violations.push_back(std::string(to_string(a.span_only_type)) +
                             " not permitted for " + etype);
      }
    } else {
      if (a.labeled_type != compat.required_labeled) {
        violations.push_back(std::string(to_string(a.labeled_type)) +
                             " not permitted for " + etype);
      }
      if (a.subtype == Subtype::Null) {
        violations.push_back("labeled argument carries the null subtype");
      } else if (inv.subtype_index(a.labeled_type, a.subtype) < 0) {
        violations.push_back("subtype '" + std::string(to_string(a.subtype)) +
                             "' not in the " +
                             std::string(to_string(a.labeled_type)) + " set");
      }
      ++labeled_count[static_cast<int>(a.labeled_type)];
    }
  }
  for (LabeledArg v : kLabeledArgs) {
    if (labeled_count[static_cast<int>(v)] > 1) {
      violations.push_back("duplicate labeled argument " +
                           std::string(to_string(v)));
    }
  }
  if (!has_required_labeled_arg(e)) {
    violations.push_back("missing required labeled argument " +
                         std::string(to_string(compat.required_labeled)) +
                         " for " + etype);
  }
  return violations;
}

}  // namespace sdoh

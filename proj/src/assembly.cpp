#include "sdoh/assembly.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "sdoh/parallel.hpp"

namespace sdoh {

namespace {

int argmax_null_ties(const Vec& z) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(z.size()); ++i) {
    if (z[static_cast<std::size_t>(i)] > z[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

}  // namespace

DecodedEntities decode(const RawPredictions& raw, const LabelInventory& inv) {
  (void)inv;
  DecodedEntities out;
  out.candidates = raw.candidates;
  out.entity_choice.reserve(raw.candidates.size());
  for (const Vec& z : raw.entity_logits) {
    out.entity_choice.push_back(argmax_null_ties(z));
  }
  for (LabeledArg v : kLabeledArgs) {
    auto& choices = out.subtype_choice[static_cast<std::size_t>(v)];
    choices.reserve(raw.candidates.size());
    for (const Vec& z : raw.subtype_logits[static_cast<std::size_t>(v)]) {
      choices.push_back(argmax_null_ties(z));
    }
  }
  for (std::size_t p = 0; p < raw.relation_pairs.size(); ++p) {
    if (argmax_null_ties(raw.relation_logits[p]) == LabelInventory::kRelationHas) {
      out.has_pairs.push_back(raw.relation_pairs[p]);
    }
  }
  return out;
}

std::vector<Event> assemble_events(const DecodedEntities& decoded,
                                   const LabelInventory& inv,
                                   AssemblyStats* stats) {
  AssemblyStats local;
  std::map<int, Event> events;  // trigger candidate index -> event
  for (std::size_t i = 0; i < decoded.candidates.size(); ++i) {
    auto etype = inv.event_type_of(decoded.entity_choice[i]);
    if (!etype) continue;
    Event e;
    e.trigger = Trigger{*etype, decoded.candidates[i].char_span};
    events[static_cast<int>(i)] = e;
  }

  std::vector<std::pair<int, int>> pairs = decoded.has_pairs;
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [head, tail] : pairs) {
    auto ev = events.find(head);
    if (ev == events.end()) continue;  // head is not a trigger
    Event& event = ev->second;
    const EventCompat compat = compatibility(event.trigger.type, inv);
    const Span span = decoded.candidates[static_cast<std::size_t>(tail)].char_span;

    if (auto so = inv.span_only_of(
            decoded.entity_choice[static_cast<std::size_t>(tail)])) {
      if (compat.allows(*so)) {
        event.arguments.push_back(Argument::span_only(*so, span));
      } else {
        ++local.dropped_incompatible;
      }
    }
    for (LabeledArg v : kLabeledArgs) {
      const int choice =
          decoded.subtype_choice[static_cast<std::size_t>(v)][static_cast<std::size_t>(tail)];
      if (choice == 0) continue;
      if (v != compat.required_labeled) {
        ++local.dropped_incompatible;
        continue;
      }
      const Subtype subtype = inv.subtype_set(v)[static_cast<std::size_t>(choice)];
      auto existing = std::find_if(
          event.arguments.begin(), event.arguments.end(), [&](const Argument& a) {
            return a.kind == Argument::Kind::Labeled && a.labeled_type == v;
          });
      if (existing == event.arguments.end()) {
        event.arguments.push_back(Argument::labeled(v, subtype, span));
      } else {
        ++local.duplicate_labeled;
        if (span.start > existing->span.start) {
          *existing = Argument::labeled(v, subtype, span);
        }
      }
    }
  }

  std::vector<Event> out;
  out.reserve(events.size());
  for (auto& [idx, event] : events) {
    std::stable_sort(event.arguments.begin(), event.arguments.end(),
                     [](const Argument& a, const Argument& b) {
                       return a.span < b.span;
                     });
    event.incomplete = !has_required_labeled_arg(event);
    out.push_back(std::move(event));
  }
  std::stable_sort(out.begin(), out.end(), [](const Event& a, const Event& b) {
    return std::tie(a.trigger.span, a.trigger.type) <
           std::tie(b.trigger.span, b.trigger.type);
  });
  if (stats) {
    stats->dropped_incompatible += local.dropped_incompatible;
    stats->duplicate_labeled += local.duplicate_labeled;
  }
  return out;
}

AnnotationSet predict_document(const AnnotatedDoc& ad, const ModelParams& params,
                               const EmbeddingFile* side, AssemblyStats* stats) {
  AnnotationSet result;
  result.document_id = ad.doc.id;
  TokenizedDocument tokenized = tokenize(ad.doc.section_text, ad.doc.id);
  for (std::size_t s = 0; s < tokenized.sentences.size(); ++s) {
    RawPredictions raw = forward(tokenized, static_cast<int>(s), params, side);
    DecodedEntities decoded = decode(raw, params.inventory());
    std::vector<Event> events = assemble_events(decoded, params.inventory(), stats);
    result.events.insert(result.events.end(),
                         std::make_move_iterator(events.begin()),
                         std::make_move_iterator(events.end()));
  }
  std::stable_sort(result.events.begin(), result.events.end(),
                   [](const Event& a, const Event& b) {
                     return std::tie(a.trigger.span, a.trigger.type) <
                            std::tie(b.trigger.span, b.trigger.type);
                   });
  return result;
}

std::vector<AnnotationSet> predict_corpus(const CorpusPartition& part,
                                          const ModelParams& params,
                                          const EmbeddingFile* side,
                                          int threads) {
  std::vector<AnnotationSet> out(part.docs.size());
  parallel_for(part.docs.size(), threads, [&](std::size_t i) {
    out[i] = predict_document(part.docs[i], params, side, nullptr);
  });
  return out;
}

std::vector<AnnotationSet> predict_corpus_serial(const CorpusPartition& part,
                                                 const ModelParams& params,
                                                 const EmbeddingFile* side) {
  std::vector<AnnotationSet> out;
  out.reserve(part.docs.size());
  for (const AnnotatedDoc& ad : part.docs) {
    out.push_back(predict_document(ad, params, side, nullptr));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Events JSON
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json span_to_json(const Span& s, const std::string& section_text) {
  json j;
  j["start"] = s.start;
  j["end"] = s.end;
  if (s.start >= 0 && s.end <= static_cast<int>(section_text.size()) &&
      s.start < s.end) {
    j["text"] = section_text.substr(static_cast<std::size_t>(s.start),
                                    static_cast<std::size_t>(s.length()));
  } else {
    j["text"] = "";
  }
  return j;
}

Span span_from_json(const json& j) {
  return Span{j.at("start").get<int>(), j.at("end").get<int>()};
}

}  // namespace

std::string events_to_json(const std::vector<const Document*>& docs,
                           const std::vector<AnnotationSet>& anns) {
  json out = json::array();
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string& section = docs[i]->section_text;
    json doc_json;
    doc_json["document_id"] = anns[i].document_id;
    json events = json::array();
    for (const Event& e : anns[i].events) {
      json ej;
      ej["type"] = std::string(to_string(e.trigger.type));
      ej["trigger"] = span_to_json(e.trigger.span, section);
      ej["incomplete"] = e.incomplete;
      json args = json::array();
      for (const Argument& a : e.arguments) {
        json aj = span_to_json(a.span, section);
        if (a.kind == Argument::Kind::SpanOnly) {
          aj["kind"] = "span_only";
          aj["type"] = std::string(to_string(a.span_only_type));
        } else {
          aj["kind"] = "labeled";
          aj["type"] = std::string(to_string(a.labeled_type));
          aj["subtype"] = std::string(to_string(a.subtype));
        }
        args.push_back(aj);
      }
      ej["arguments"] = args;
      events.push_back(ej);
    }
    doc_json["events"] = events;
    out.push_back(doc_json);
  }
  return out.dump(2) + "\n";
}

std::vector<AnnotationSet> events_from_json(const std::string& json_text) {
  json parsed = json::parse(json_text);
  std::vector<AnnotationSet> out;
  for (const json& doc_json : parsed) {
    AnnotationSet anns;
    anns.document_id = doc_json.at("document_id").get<std::string>();
    for (const json& ej : doc_json.at("events")) {
      Event e;
      auto etype = parse_event_type(ej.at("type").get<std::string>());
      if (!etype) {
        throw std::runtime_error("events json: unknown event type " +
                                 ej.at("type").get<std::string>());
      }
      e.trigger = Trigger{*etype, span_from_json(ej.at("trigger"))};
      for (const json& aj : ej.at("arguments")) {
        const std::string kind = aj.at("kind").get<std::string>();
        if (kind == "span_only") {
          auto so = parse_span_only_arg(aj.at("type").get<std::string>());
          if (!so) throw std::runtime_error("events json: unknown argument type");
          e.arguments.push_back(Argument::span_only(*so, span_from_json(aj)));
        } else {
          auto la = parse_labeled_arg(aj.at("type").get<std::string>());
          auto sub = parse_subtype(aj.at("subtype").get<std::string>());
          if (!la || !sub) {
            throw std::runtime_error("events json: unknown labeled argument");
          }
          e.arguments.push_back(Argument::labeled(*la, *sub, span_from_json(aj)));
        }
      }
      e.incomplete = ej.value("incomplete", !has_required_labeled_arg(e));
      anns.events.push_back(std::move(e));
    }
    out.push_back(std::move(anns));
  }
  return out;
}

}  // namespace sdoh

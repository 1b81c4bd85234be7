#include "nsvqa/executor.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "nsvqa/error.hpp"
#include "nsvqa/text.hpp"

namespace nsvqa {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::NonUniqueAutoFix: return "NonUniqueAutoFix";
    case EventKind::DefaultValueInserted: return "DefaultValueInserted";
    case EventKind::ObjectNotFound: return "ObjectNotFound";
  }
  return "?";
}

std::string_view to_string(GraphSource source) {
  return source == GraphSource::Gold ? "gold" : "generated";
}

std::optional<std::string_view> attribute_category(std::string_view attribute) {
  struct Entry {
    std::string_view attribute;
    std::string_view category;
  };
  static constexpr std::array<Entry, 44> kLexicon{{
      {"white", "color"},     {"black", "color"},     {"red", "color"},
      {"blue", "color"},      {"green", "color"},     {"yellow", "color"},
      {"brown", "color"},     {"gray", "color"},      {"grey", "color"},
      {"orange", "color"},    {"pink", "color"},      {"purple", "color"},
      {"silver", "color"},    {"gold", "color"},      {"tan", "color"},
      {"beige", "color"},     {"wooden", "material"}, {"metal", "material"},
      {"plastic", "material"}, {"glass", "material"}, {"leather", "material"},
      {"concrete", "material"}, {"stone", "material"}, {"brick", "material"},
      {"cloth", "material"},  {"paper", "material"},  {"small", "size"},
      {"large", "size"},      {"big", "size"},        {"tiny", "size"},
      {"huge", "size"},       {"tall", "size"},       {"short", "size"},
      {"long", "size"},       {"round", "shape"},     {"square", "shape"},
      {"rectangular", "shape"}, {"empty", "state"},   {"full", "state"},
      {"open", "state"},      {"closed", "state"},    {"wet", "state"},
      {"dry", "state"},       {"standing", "pose"},
  }};
  for (const auto& e : kLexicon) {
    if (e.attribute == attribute) return e.category;
  }
  return std::nullopt;
}

std::string normalize_answer(const Value& value) {
  switch (type_of(value)) {
    case ValueType::Boolean: return std::get<bool>(value) ? "yes" : "no";
    case ValueType::Integer: return std::to_string(std::get<std::int64_t>(value));
    case ValueType::String: return normalize_token(std::get<std::string>(value));
    default:
      throw Error(ErrorCode::NonAnswerValue,
                  std::string(to_string(type_of(value))) + " is not an answer");
  }
}

namespace {

// Thrown internally to stop evaluation after a fatal grammar event.
struct FatalStop {};

class Interpreter {
 public:
  Interpreter(const ImageSet& images, const AliasDictionary* dict, ExecOutcome& outcome)
      : images_(images), dict_(dict), outcome_(outcome) {
    for (std::uint32_t i = 0; i < images.size(); ++i) {
      for (std::uint32_t o = 0; o < images.image(i).size(); ++o) everything_.members.push_back({i, o});
    }
  }

  const ObjectSet& everything() const { return everything_; }

  // Evaluates a block; `top` is the enclosing top-level step index for
  // events, or npos at top level.
  std::vector<Value> run_block(const std::vector<ClfStep>& steps, const ObjectSet& scope,
                               std::size_t top, bool trace) {
    std::vector<Value> values;
    values.reserve(steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const std::size_t event_index = top == npos ? i : top;
      values.push_back(eval(steps[i], values, scope, event_index));
      if (trace) {
        outcome_.trace.push_back({i, type_of(values.back()), summarize(values.back())});
      }
    }
    return values;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Value eval(const ClfStep& step, const std::vector<Value>& values, const ObjectSet& scope,
             std::size_t at) {
    auto input = [&](std::size_t k) -> const Value& { return values[step.deps.at(k)]; };
    auto token = [&](std::size_t k) -> const std::string& {
      return std::get<std::string>(step.args.at(k));
    };

    switch (step.op) {
      case Op::Scene:
        return scope;

      case Op::Find: {
        const ObjectSet& pool = step.deps.empty() ? everything_ : as_objects(input(0));
        return find(token(0), pool);
      }

      case Op::Filter: {
        const ObjectSet& src = as_objects(input(0));
        ObjectSet out;
        if (step.qualifier == Qualifier::Attr) {
          for (const auto& r : src.members) {
            if (node(r).has_attribute(token(0))) out.members.push_back(r);
          }
        } else if (step.deps.size() == 1) {
          for (const auto& r : src.members) {
            if (node(r).has_relation(token(0))) out.members.push_back(r);
          }
        } else {
          const ObjectSet& targets = as_objects(input(1));
          for (const auto& r : src.members) {
            if (relates_to(r, token(0), targets)) out.members.push_back(r);
          }
        }
        return out;
      }

      case Op::Choose: {
        const ObjectRef subject = single(as_objects(input(0)), at, step);
        const ObjectSet* targets = step.deps.size() > 1 ? &as_objects(input(1)) : nullptr;
        std::array<bool, 2> holds{};
        for (std::size_t k = 0; k < 2; ++k) holds[k] = candidate_holds(step, token(k), subject, targets);
        if (holds[0] && holds[1]) {
          event(EventKind::NonUniqueAutoFix, at, "both candidates hold; took '" + token(0) + "'");
          return token(0);
        }
        if (!holds[0] && !holds[1]) {
          event(EventKind::DefaultValueInserted, at, "no candidate holds; took '" + token(0) + "'");
          return token(0);
        }
        return holds[0] ? token(0) : token(1);
      }

      case Op::Query: {
        const ObjectRef subject = single(as_objects(input(0)), at, step);
        const ObjectNode& n = node(subject);
        if (step.qualifier == Qualifier::Name) return n.name;
        std::vector<const std::string*> picks;
        for (const auto& a : n.attributes) {
          if (step.args.empty() || attribute_category(a) == std::string_view(token(0))) {
            picks.push_back(&a);
          }
        }
        if (picks.empty()) {
          event(EventKind::DefaultValueInserted, at, "no attribute of the requested kind");
          return std::string(kNoAttributeAnswer);
        }
        if (picks.size() > 1) {
          event(EventKind::NonUniqueAutoFix, at,
                std::to_string(picks.size()) + " attributes; took '" + *picks.front() + "'");
        }
        return *picks.front();
      }

      case Op::Verify: {
        const ObjectRef subject = single(as_objects(input(0)), at, step);
        return node(subject).has_attribute(token(0));
      }

      case Op::Map: {
        std::vector<ObjectSet> bindings;
        const Value& domain = input(0);
        if (const auto* g = std::get_if<GroupedObjects>(&domain)) {
          for (const auto& group : g->groups) bindings.push_back(group.members);
        } else {
          for (const auto& r : as_objects(domain).members) bindings.push_back(ObjectSet{{r}});
        }
        const bool is_or = step.qualifier == Qualifier::Or;
        bool acc = !is_or;
        for (const auto& bound : bindings) {
          const auto sub_values = run_block(step.sub, bound, at, false);
          const bool v = as_bool(sub_values.back());
          acc = is_or ? (acc || v) : (acc && v);
        }
        return acc;
      }

      case Op::LogicNot:
        return !bool_operand(step, values, 0, at);

      case Op::LogicOr:
      case Op::LogicAnd: {
        const bool a = bool_operand(step, values, 0, at);
        const bool b = bool_operand(step, values, 1, at);
        return step.op == Op::LogicOr ? (a || b) : (a && b);
      }

      case Op::Count:
        return static_cast<std::int64_t>(cardinality(input(0)));

      case Op::Exists:
        return cardinality(input(0)) > 0;

      case Op::Keys: {
        TokenSet out;
        for (const auto& group : as_grouped(input(0)).groups) {
          out.tokens.push_back(images_.image(group.image).image_id());
        }
        return out;
      }

      case Op::UniqueImages: {
        TokenSet out;
        std::uint32_t last = static_cast<std::uint32_t>(-1);
        for (const auto& r : as_objects(input(0)).members) {
          if (r.image != last) out.tokens.push_back(images_.image(r.image).image_id());
          last = r.image;
        }
        return out;
      }

      case Op::GroupByImages: {
        GroupedObjects out;
        for (std::uint32_t i = 0; i < images_.size(); ++i) out.groups.push_back({i, {}});
        for (const auto& r : as_objects(input(0)).members) out.groups[r.image].members.members.push_back(r);
        return out;
      }

      case Op::KeepIfValuesCount: {
        std::int64_t threshold = 0;
        if (step.args.empty()) {
          event(EventKind::DefaultValueInserted, at, "missing count threshold, defaults to 0");
        } else {
          threshold = std::get<std::int64_t>(step.args.front());
        }
        GroupedObjects out;
        for (const auto& group : as_grouped(input(0)).groups) {
          if (compare(step.qualifier, static_cast<std::int64_t>(group.members.members.size()), threshold)) {
            out.groups.push_back(group);
          }
        }
        return out;
      }

      case Op::Compare: {
        // Inputs fill operand slots from the left, literals from the right.
        std::array<std::optional<std::int64_t>, 2> slot{};
        for (std::size_t k = 0; k < step.deps.size(); ++k) slot[k] = as_int(input(k));
        for (std::size_t j = 0; j < step.args.size(); ++j) {
          slot[2 - step.args.size() + j] = std::get<std::int64_t>(step.args[j]);
        }
        for (std::size_t k = 0; k < 2; ++k) {
          if (!slot[k]) {
            event(EventKind::DefaultValueInserted, at,
                  std::string(k == 0 ? "left" : "right") + " operand missing, defaults to 0");
            slot[k] = 0;
          }
        }
        return compare(step.qualifier, *slot[0], *slot[1]);
      }
    }
    throw Error(ErrorCode::TypeMismatch, "unhandled operation");
  }

  ObjectSet find(const std::string& mention, const ObjectSet& pool) {
    ObjectSet out;
    std::size_t k = 0;
    std::vector<std::size_t> candidates;
    while (k < pool.members.size()) {
      const std::uint32_t image = pool.members[k].image;
      candidates.clear();
      for (; k < pool.members.size() && pool.members[k].image == image; ++k) {
        candidates.push_back(pool.members[k].object);
      }
      auto hits = resolve_among(dict_, mention, images_.image(image), candidates);
      std::sort(hits.begin(), hits.end());
      for (std::size_t h : hits) out.members.push_back({image, static_cast<std::uint32_t>(h)});
    }
    return out;
  }

  bool candidate_holds(const ClfStep& step, const std::string& candidate, ObjectRef subject,
                       const ObjectSet* targets) {
    switch (step.qualifier) {
      case Qualifier::Name: {
        const std::array<std::size_t, 1> only{subject.object};
        return !resolve_among(dict_, candidate, images_.image(subject.image), only).empty();
      }
      case Qualifier::Attr:
        return node(subject).has_attribute(candidate);
      default:
        return targets ? relates_to(subject, candidate, *targets) : node(subject).has_relation(candidate);
    }
  }

  bool relates_to(ObjectRef from, const std::string& predicate, const ObjectSet& targets) const {
    const SceneGraph& g = images_.image(from.image);
    for (const auto& rel : node(from).relations) {
      if (rel.predicate != predicate) continue;
      const auto idx = g.index_of(rel.target);
      const ObjectRef to{from.image, static_cast<std::uint32_t>(*idx)};
      if (std::binary_search(targets.members.begin(), targets.members.end(), to)) return true;
    }
    return false;
  }

  ObjectRef single(const ObjectSet& set, std::size_t at, const ClfStep& step) {
    if (set.members.empty()) {
      event(EventKind::ObjectNotFound, at,
            std::string(to_string(step.op)) + " needs one object, got none");
      outcome_.fatal = true;
      throw FatalStop{};
    }
    if (set.members.size() > 1) {
      const ObjectRef first = set.members.front();
      event(EventKind::NonUniqueAutoFix, at,
            std::to_string(set.members.size()) + " objects; took " +
                images_.image(first.image).image_id() + ":" + node(first).object_id);
    }
    return set.members.front();
  }

  bool bool_operand(const ClfStep& step, const std::vector<Value>& values, std::size_t k,
                    std::size_t at) {
    if (k < step.deps.size()) return as_bool(values[step.deps[k]]);
    event(EventKind::DefaultValueInserted, at, "missing Boolean operand, defaults to false");
    return false;
  }

  static bool compare(Qualifier q, std::int64_t a, std::int64_t b) {
    switch (q) {
      case Qualifier::Eq: return a == b;
      case Qualifier::Geq: return a >= b;
      case Qualifier::Leq: return a <= b;
      case Qualifier::Lt: return a < b;
      case Qualifier::Gt: return a > b;
      default: throw Error(ErrorCode::BadQualifier, "not a comparison");
    }
  }

  std::size_t cardinality(const Value& v) const {
    switch (type_of(v)) {
      case ValueType::ObjectSet: return std::get<ObjectSet>(v).members.size();
      case ValueType::GroupedObjects: return std::get<GroupedObjects>(v).groups.size();
      case ValueType::TokenSet: return std::get<TokenSet>(v).tokens.size();
      default: throw Error(ErrorCode::TypeMismatch, "cannot count a scalar");
    }
  }

  const ObjectNode& node(ObjectRef r) const { return images_.image(r.image).object(r.object); }

  template <typename T>
  static const T& expect(const Value& v) {
    if (const auto* p = std::get_if<T>(&v)) return *p;
    throw Error(ErrorCode::TypeMismatch,
                "unexpected " + std::string(to_string(type_of(v))) + " input");
  }
  static const ObjectSet& as_objects(const Value& v) { return expect<ObjectSet>(v); }
  static const GroupedObjects& as_grouped(const Value& v) { return expect<GroupedObjects>(v); }
  static bool as_bool(const Value& v) { return expect<bool>(v); }
  static std::int64_t as_int(const Value& v) { return expect<std::int64_t>(v); }

  void event(EventKind kind, std::size_t at, std::string detail) {
    outcome_.events.push_back({kind, at, std::move(detail)});
  }

  std::string summarize(const Value& v) const {
    constexpr std::size_t kCap = 16;
    std::string out;
    auto ref = [&](ObjectRef r) { return images_.image(r.image).image_id() + ":" + node(r).object_id; };
    switch (type_of(v)) {
      case ValueType::ObjectSet: {
        const auto& m = std::get<ObjectSet>(v).members;
        out = "ObjectSet[" + std::to_string(m.size()) + "]";
        for (std::size_t i = 0; i < m.size() && i < kCap; ++i) out += (i ? "," : " ") + ref(m[i]);
        if (m.size() > kCap) out += ",...";
        break;
      }
      case ValueType::GroupedObjects: {
        const auto& g = std::get<GroupedObjects>(v).groups;
        out = "GroupedObjects[" + std::to_string(g.size()) + "]";
        for (std::size_t i = 0; i < g.size(); ++i) {
          out += (i ? "," : " ") + images_.image(g[i].image).image_id() + "=" +
                 std::to_string(g[i].members.members.size());
        }
        break;
      }
      case ValueType::TokenSet: {
        const auto& t = std::get<TokenSet>(v).tokens;
        out = "TokenSet[" + std::to_string(t.size()) + "]";
        for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : " ") + t[i];
        break;
      }
      default:
        out = std::string(to_string(type_of(v))) + " " + normalize_answer(v);
    }
    return out;
  }

  const ImageSet& images_;
  const AliasDictionary* dict_;
  ExecOutcome& outcome_;
  ObjectSet everything_;
};

}  // namespace

ExecOutcome execute(const ClfProgram& program, const ImageSet& images,
                    const AliasDictionary* dict, const ExecOptions& options) {
  const ValidationReport report = validate(program);
  for (const auto& f : report.findings) {
    if (f.severity == Severity::Error) {
      throw Error(f.code.value_or(ErrorCode::TypeMismatch), "invalid program: " + f.message);
    }
  }
  ExecOutcome outcome;
  Interpreter interp(images, dict, outcome);
  try {
    const auto values =
        interp.run_block(program.steps, interp.everything(), Interpreter::npos, options.trace);
    outcome.answer = normalize_answer(values.back());
  } catch (const FatalStop&) {
    outcome.answer.reset();
  }
  return outcome;
}

}  // namespace nsvqa

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "hoie/data/config.hpp"
#include "hoie/data/corpus.hpp"
#include "hoie/data/synthetic.hpp"

using namespace hoie;
using namespace hoie::data;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hoie_data_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("dataset save/load round trip keeps records and order") {
  auto records = generate_synthetic(default_synthetic_schema(), 3, 25);
  const auto path = temp_path("roundtrip.ndjson");
  save_dataset(path.string(), records);
  CHECK(load_dataset(path.string()) == records);
  std::filesystem::remove(path);
}

TEST_CASE("a record with end < start is rejected with its line number") {
  const auto path = temp_path("bad.ndjson");
  write_text(path,
             R"({"id":"a","tokens":["x","y"],"entities":[],"triggers":[],"relations":[],"events":[]})"
             "\n"
             R"({"id":"b","tokens":["x","y"],"entities":[{"start":1,"end":0,"type":"PER"}],"triggers":[],"relations":[],"events":[]})"
             "\n");
  try {
    load_dataset(path.string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("malformed and dangling records are rejected") {
  const auto path = temp_path("dangling.ndjson");
  write_text(path,
             R"({"id":"a","tokens":["x"],"entities":[{"start":0,"end":0,"type":"PER"}],"triggers":[],)"
             R"("relations":[{"head_entity_index":0,"tail_entity_index":3,"type":"R"}],"events":[]})"
             "\n");
  CHECK_THROWS_AS(load_dataset(path.string()), DataError);
  write_text(path, "{not json\n");
  CHECK_THROWS_AS(load_dataset(path.string()), DataError);
  write_text(path, R"({"id":"a","tokens":[],"entities":[],"triggers":[],"relations":[],"events":[],"extra":1})"
                   "\n");
  CHECK_THROWS_AS(load_dataset(path.string()), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("hand-authored fixture loads with the expected counts") {
  auto records = load_dataset("fixtures/ace_style.ndjson");
  REQUIRE(records.size() == 3);
  auto count = [&](auto member) {
    std::vector<std::size_t> n;
    for (const auto& r : records) n.push_back((r.*member).size());
    return n;
  };
  CHECK(count(&DatasetRecord::tokens) == std::vector<std::size_t>{7, 11, 5});
  CHECK(count(&DatasetRecord::entities) == std::vector<std::size_t>{3, 4, 1});
  CHECK(count(&DatasetRecord::triggers) == std::vector<std::size_t>{1, 2, 0});
  CHECK(count(&DatasetRecord::relations) == std::vector<std::size_t>{1, 2, 0});
  CHECK(count(&DatasetRecord::events) == std::vector<std::size_t>{1, 2, 0});
  CHECK(records[1].events[0].args[1] == Argument{3, "Place"});
  CHECK(records[1].relations[0] == Relation{1, 0, "PER-SOC"});

  auto schema = load_schema("fixtures/ace_schema.json");
  // ace-2: 2 triggers x 4 entities role candidates, 4 x 3 relation candidates.
  auto g = to_graph(records[1], schema);
  CHECK(g.nodes.size() == 6);
  CHECK(g.edges.size() == 8 + 12);
  int labelled = 0;
  for (const auto& e : g.edges) labelled += e.label != 0;
  CHECK(labelled == 4);
}

TEST_CASE("graph conversion round trips and rejects unknown labels") {
  auto schema = load_schema("fixtures/ace_schema.json");
  for (const auto& r : load_dataset("fixtures/ace_style.ndjson")) {
    auto back = to_record(to_graph(r, schema), schema);
    CHECK(back.tokens == r.tokens);
    CHECK(back.entities == r.entities);
    CHECK(back.triggers == r.triggers);
    CHECK(back.relations.size() == r.relations.size());
    for (const auto& rel : r.relations)
      CHECK(std::find(back.relations.begin(), back.relations.end(), rel) != back.relations.end());
  }
  DatasetRecord bad{"x", {"a"}, {{0, 0, "ALIEN"}}, {}, {}, {}};
  CHECK_THROWS_AS(to_graph(bad, schema), DataError);
}

TEST_CASE("schema JSON round trip") {
  auto s = default_synthetic_schema().label_schema();
  CHECK(schema_from_json(json::parse(schema_to_json(s).dump())) == s);
  auto syn = default_synthetic_schema();
  syn.noise = 0.25;
  auto back = synthetic_schema_from_json(json::parse(synthetic_schema_to_json(syn).dump()));
  CHECK(back.noise == doctest::Approx(0.25));
  CHECK(back.frames.size() == syn.frames.size());
  CHECK_THROWS_AS(synthetic_schema_from_json(json{{"bogus", 1}}), std::invalid_argument);
}

TEST_CASE("generator is a pure function of the seed") {
  auto s = default_synthetic_schema();
  CHECK(generate_synthetic(s, 11, 50) == generate_synthetic(s, 11, 50));
  CHECK(generate_synthetic(s, 11, 50) != generate_synthetic(s, 12, 50));
  CHECK_THROWS_AS(generate_synthetic(s, 1, 0), std::invalid_argument);
}

TEST_CASE("with zero noise every relation satisfies the compatibility table") {
  auto s = default_synthetic_schema();
  s.noise = 0.0;
  std::size_t checked = 0;
  for (const auto& r : generate_synthetic(s, 5, 400))
    for (const auto& rel : r.relations) {
      auto ok = s.compatible(r.entities[rel.head].type, r.entities[rel.tail].type);
      CHECK(std::find(ok.begin(), ok.end(), rel.type) != ok.end());
      ++checked;
    }
  CHECK(checked > 400);
  for (const auto& r : generate_synthetic(s, 6, 200)) {
    const auto& ev = r.triggers[0].event_type;
    const auto& f = *std::find_if(s.frames.begin(), s.frames.end(), [&](const RoleFrame& x) { return x.event == ev; });
    CHECK(r.events[0].args[0].role == f.first);
    CHECK(r.events[0].args[1].role == f.second);
  }
}

TEST_CASE("role-pair frequency matches the rule target") {
  auto s = default_synthetic_schema();
  const auto records = generate_synthetic(s, 2024, 1000);
  std::map<std::string, std::pair<int, int>> hits;  // event -> (frame pairs, total)
  for (const auto& r : records) {
    const auto& ev = r.triggers[0].event_type;
    const auto& f = *std::find_if(s.frames.begin(), s.frames.end(), [&](const RoleFrame& x) { return x.event == ev; });
    auto& h = hits[ev];
    h.first += r.events[0].args[0].role == f.first && r.events[0].args[1].role == f.second;
    h.second += 1;
  }
  // A noisy pair is uniform over 3x3 legal pairs, so it lands on the frame 1/9 of the time.
  const double target = (1 - s.noise) + s.noise / 9.0;
  int frame = 0, total = 0;
  for (const auto& [ev, h] : hits) {
    frame += h.first;
    total += h.second;
  }
  CHECK(total == 1000);
  CHECK(std::abs(static_cast<double>(frame) / total - target) < 0.03);
}

TEST_CASE("synthetic schema validation") {
  auto s = default_synthetic_schema();
  s.noise = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_synthetic_schema();
  s.frames.push_back({"Attack", "Agent", "Nobody"});
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_synthetic_schema();
  s.hub_types = {"LOC"};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("config defaults follow the hyperparameter table") {
  Config c = config_from_json(json::object());
  CHECK(c.training.batch_size == 10);
  CHECK(c.dropout == doctest::Approx(0.4));
  CHECK(c.training.optimizer.other.lr == doctest::Approx(1e-3));
  CHECK(c.training.optimizer.encoder.lr == doctest::Approx(1e-5));
  CHECK(c.training.warmup_epochs == 5);
  CHECK(c.training.epochs == 80);
  CHECK(c.training.optimizer.clip == doctest::Approx(5.0));
  CHECK(c.scoring.entity_hidden == 150);
  CHECK(c.scoring.trigger_hidden == 600);
  CHECK(c.scoring.relation_width == 150);
  CHECK(c.scoring.role_width == 600);
  CHECK(c.scoring.binary_mid == 150);
  CHECK(c.scoring.ternary_head == 150);
  CHECK(c.schedule.iterations == 2);
  CHECK(c.label_spans == LabelSpans::gold);
}

TEST_CASE("config echo round trips and unknown keys are rejected") {
  json j = {{"seed", 9},
            {"factors", {{"binary", {"homo-i"}}, {"ternary", {"hete-iii"}}}},
            {"inference", {{"iterations", 1}, {"schedule", "synchronous"}, {"alpha_mode", "learned"}}},
            {"training", {{"epochs", 3}, {"label_spans", "identified"}}}};
  Config c = config_from_json(j);
  CHECK(c.seed == 9);
  CHECK(c.training.seed == 9);
  CHECK(c.cases.binary.size() == 1);
  CHECK(c.schedule.mode == infer::ScheduleMode::synchronous);
  CHECK(c.alpha_mode == train::AlphaMode::learned);
  CHECK(c.label_spans == LabelSpans::identified);
  Config again = config_from_json(json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(again).dump() == config_to_json(c).dump());
  CHECK(c.labeler().high_order());

  CHECK_THROWS_AS(config_from_json(json{{"sed", 1}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"training", {{"lr_dekay", 1}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"training", {{"lr", -1.0}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"training", {{"epochs", "many"}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json{{"factors", {{"binary", {"homo-x"}}}}}), std::invalid_argument);
}

TEST_CASE("sentences carry vocabulary ids and gold graphs") {
  auto records = load_dataset("fixtures/ace_style.ndjson");
  auto schema = load_schema("fixtures/ace_schema.json");
  auto vocab = build_vocabulary({records[0]});
  auto sents = to_sentences(records, schema, vocab);
  REQUIRE(sents.size() == 3);
  CHECK(sents[0].input.ids.size() == 7);
  CHECK(sents[0].input.ids[0] == vocab.id("Soldiers"));
  CHECK(sents[1].input.ids[1] == enc::Vocabulary::kUnknown);
  CHECK(sents[1].graph.nodes.size() == 6);
}

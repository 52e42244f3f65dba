#include <algorithm>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "screening/cohort.hpp"
#include "screening/error.hpp"

using namespace screening;
using nlohmann::json;

namespace {

PatientRecord full_record(const FeatureSchema& schema) {
  PatientRecord r;
  for (const auto& f : schema.fields()) {
    if (f.kind == FieldKind::Numeric) r.values[f.name] = std::to_string((f.range.first + f.range.second) / 2);
    else r.values[f.name] = f.values.front();
  }
  return r;
}

FeatureSchema resolved_default() {
  std::map<std::string, std::vector<double>> numeric;
  for (const auto& f : default_schema().fields())
    if (f.kind == FieldKind::Numeric) numeric[f.name] = {f.range.first, f.range.second};
  return default_schema().with_resolved_bins(numeric);
}

EncodedCohort counted(std::size_t normal, std::size_t abnormal) {
  std::vector<Column> cols{{"a", Category::BCT, "a"}};
  std::vector<EncodedRow> rows;
  for (std::size_t i = 0; i < normal + abnormal; ++i)
    rows.push_back({{static_cast<std::uint8_t>(i % 2)}, i < normal ? Label::Normal : Label::Abnormal, i});
  return EncodedCohort(cols, rows);
}

}  // namespace

TEST_SUITE("cohort") {
  TEST_CASE("bundled schema: 56 fields over five categories give 81 columns plus label") {
    const FeatureSchema s = default_schema();
    CHECK(s.fields().size() == 57);
    CHECK(s.column_count() == 81);
    std::map<Category, std::size_t> per_category;
    for (const auto& c : resolved_default().columns()) ++per_category[c.category];
    CHECK(per_category[Category::Demographics] == 27);
    CHECK(per_category[Category::BCT] == 15);
    CHECK(per_category[Category::MP] == 18);
    CHECK(per_category.count(Category::Label) == 0);
  }

  TEST_CASE("two label fields are rejected as ambiguous") {
    json j{{"fields", {fixture::label_field_json(), fixture::label_field_json()}}};
    j["fields"][1]["name"] = "Outcome2";
    CHECK_THROWS_WITH_AS(FeatureSchema::from_json(j), doctest::Contains("ambiguous label"), SchemaError);
  }

  TEST_CASE("schema validation errors") {
    SUBCASE("missing label") {
      json j{{"fields", {fixture::flag_json("A", "BCT")}}};
      CHECK_THROWS_WITH_AS(FeatureSchema::from_json(j), doctest::Contains("missing label"), SchemaError);
    }
    SUBCASE("duplicate field") {
      json j{{"fields", {fixture::label_field_json(), fixture::flag_json("A", "BCT"), fixture::flag_json("A", "BCT")}}};
      CHECK_THROWS_WITH_AS(FeatureSchema::from_json(j), doctest::Contains("duplicate"), SchemaError);
    }
    SUBCASE("parse failure") { CHECK_THROWS_AS(FeatureSchema::parse("{not json"), SchemaError); }
    SUBCASE("missing file") {
      CHECK_THROWS_WITH_AS(load_schema("/no/such/schema.json"), doctest::Contains("schema not found"), SchemaError);
    }
  }

  TEST_CASE("one binary nominal field plus label gives two columns") {
    json field{{"name", "Smoker"}, {"category", "Lifestyle"}, {"kind", "nominal"}, {"values", {"no", "yes"}}};
    const auto s = FeatureSchema::from_json({{"fields", {field, fixture::label_field_json()}}});
    CHECK(s.column_count() == 2);
    const auto cols = s.columns();
    CHECK(cols[0].name == "Smoker-no");
    CHECK(cols[1].name == "Smoker-yes");
  }

  TEST_CASE("schema JSON round trip") {
    const auto s = default_schema();
    CHECK(FeatureSchema::from_json(s.to_json()).to_json() == s.to_json());
  }

  TEST_CASE("impute: conditional, mean and identity") {
    const FeatureSchema s = resolved_default();
    PatientRecord base = full_record(s);
    std::vector<PatientRecord> cohort{base};
    cohort[0].values["Height"] = "150";
    cohort.push_back(base);
    cohort[1].values["Height"] = "170";
    cohort[1].values["Sex"] = "male";
    const CohortStats stats = compute_stats(s, cohort);

    SUBCASE("sex filled as female from menstrual period") {
      PatientRecord r = base;
      r.values.erase("Sex");
      r.values["Last Menstrual Period"] = "yes";
      CHECK(impute(r, s, stats).values.at("Sex") == "female");
    }
    SUBCASE("height filled with the cohort mean") {
      PatientRecord r = base;
      r.values["Height"] = "";
      CHECK(std::stod(impute(r, s, stats).values.at("Height")) == doctest::Approx(160.0));
    }
    SUBCASE("complete record unchanged") { CHECK(impute(base, s, stats) == base); }
    SUBCASE("missing label is rejected") {
      PatientRecord r = base;
      r.values.erase("Oral Cavity");
      CHECK_THROWS_AS(impute(r, s, stats), RecordRejected);
    }
    SUBCASE("idempotent") {
      PatientRecord r = base;
      r.values.erase("Height");
      r.values.erase("Marital Status");
      r.values.erase("Sex");
      const auto once = impute(r, s, stats);
      CHECK(impute(once, s, stats) == once);
    }
  }

  TEST_CASE("binarize: one-hot nominal fields and closed value sets") {
    const FeatureSchema s = resolved_default();
    const auto cols = s.columns();
    PatientRecord r = full_record(s);
    r.values["Marital Status"] = "M";
    const auto enc = binarize(r, s);
    REQUIRE(enc.x.size() == 81);
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (cols[j].field == "Marital Status") CHECK(enc.x[j] == (cols[j].name == "Marital Status-M" ? 1 : 0));

    // Exactly one 1 per nominal / numeric group.
    std::map<std::string, int> ones;
    for (std::size_t j = 0; j < cols.size(); ++j) ones[cols[j].field] += enc.x[j];
    for (const auto& f : s.fields())
      if (f.kind != FieldKind::Flag && f.category != Category::Label) CHECK_MESSAGE(ones[f.name] == 1, f.name);

    r.values["Religion"] = "Jain";
    CHECK_THROWS_WITH_AS(binarize(r, s), doctest::Contains("unknown value"), RecordRejected);
    r = full_record(s);
    r.values["Age"] = "150";
    CHECK_THROWS_WITH_AS(binarize(r, s), doctest::Contains("outside all bins"), RecordRejected);
  }

  TEST_CASE("ingest skips bad records and keeps input order") {
    const FeatureSchema s = default_schema();
    PatientRecord good = full_record(s);
    PatientRecord bad = good;
    bad.values["Religion"] = "Jain";
    std::vector<PatientRecord> records{good, bad, good};
    records[2].values["Age"] = "60";
    const auto res = ingest(s, records);
    CHECK(res.cohort.size() == 2);
    REQUIRE(res.rejected.size() == 1);
    CHECK(res.rejected[0].record_index == 1);
    CHECK(res.cohort.rows()[1].origin == 2);
  }

  TEST_CASE("records survive a CSV round trip") {
    const FeatureSchema s = default_schema();
    std::vector<PatientRecord> records{full_record(s), full_record(s)};
    records[1].values["Occupation"] = "";
    records[1].values["Religion"] = "others";
    std::stringstream ss;
    write_records_csv(ss, s, records);
    auto back = read_records_csv(ss, s);
    REQUIRE(back.size() == 2);
    CHECK(back[0].get("Religion") == records[0].get("Religion"));
    CHECK(back[1].get("Religion") == std::optional<std::string_view>("others"));
    CHECK_FALSE(back[1].get("Occupation").has_value());
  }

  TEST_CASE("split sizes, determinism and partition") {
    const auto c = counted(3597, 92);
    const auto sp = split(c, 2.0 / 3.0, 5);
    CHECK(sp.train.size() == 2459);
    CHECK(sp.test.size() == 1230);
    CHECK(sp.train.size() == 3689 * 2 / 3);

    const auto again = split(c, 2.0 / 3.0, 5);
    for (std::size_t i = 0; i < sp.train.size(); ++i) CHECK(sp.train.rows()[i].origin == again.train.rows()[i].origin);

    std::vector<std::size_t> origins;
    for (const auto& r : sp.train.rows()) origins.push_back(r.origin);
    for (const auto& r : sp.test.rows()) origins.push_back(r.origin);
    std::sort(origins.begin(), origins.end());
    for (std::size_t i = 0; i < origins.size(); ++i) REQUIRE(origins[i] == i);

    const auto small = split(counted(2, 1), 2.0 / 3.0, 1);
    CHECK(small.train.size() == 2);
    CHECK(small.test.size() == 1);

    CHECK_THROWS_AS(split(c, 1.0, 1), UsageError);
    CHECK_THROWS_AS(split(c, 0.0, 1), UsageError);
    CHECK_THROWS_AS(split(EncodedCohort({{"a", Category::BCT, "a"}}, {}), 0.5, 1), DataError);
  }

  TEST_CASE("supersample count law") {
    const auto c = counted(3597, 92);
    const auto s = supersample(c, 10);
    CHECK(s.size() == 4609);
    CHECK(s.n_abnormal() == 1012);
    CHECK(s.n_normal() == 3597);
    CHECK(static_cast<double>(s.n_abnormal()) / s.n_normal() == doctest::Approx(0.2813).epsilon(0.0001 / 0.2813));

    std::map<std::size_t, int> copies;
    for (const auto& r : s.rows())
      if (r.label == Label::Abnormal) ++copies[r.origin];
    CHECK(copies.size() == 92);
    for (const auto& [origin, n] : copies) CHECK(n == 11);

    CHECK(supersample(c, 0).size() == c.size());
    CHECK(supersample(counted(10, 0), 7).size() == 10);
    CHECK_THROWS_AS(supersample(c, -1), UsageError);
  }

  TEST_CASE("encoded cohort validates its rows") {
    std::vector<Column> cols{{"a", Category::BCT, "a"}, {"b", Category::BCT, "b"}};
    CHECK_THROWS_AS(EncodedCohort(cols, {{{1}, Label::Normal, 0}}), DataError);
    CHECK_THROWS_AS(EncodedCohort(cols, {{{1, 2}, Label::Normal, 0}}), DataError);
    const EncodedCohort ok(cols, {{{1, 0}, Label::Normal, 0}, {{0, 1}, Label::Abnormal, 1}});
    CHECK(ok.n_normal() == 1);
    CHECK(ok.n_abnormal() == 1);
    const std::vector<std::string> drop{"a"};
    const auto d = ok.drop_columns(drop);
    CHECK(d.dim() == 1);
    CHECK(d.rows()[1].x[0] == 1);
  }
}

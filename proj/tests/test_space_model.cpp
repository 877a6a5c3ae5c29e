#include <doctest.h>

#include <random>

#include "dosm/error.hpp"
#include "dosm/space_model.hpp"
#include "support.hpp"

using namespace dosm;

namespace {

bool has_error(const ValidationReport& r, const std::string& message) {
  for (const auto& e : r.errors) {
    if (e.message == message) return true;
  }
  return false;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::NotFound;
}

}  // namespace

TEST_SUITE("space-model") {

TEST_CASE("demo museum validates cleanly") {
  const SpaceModel m = testing::demo_space();
  const ValidationReport r = validate_space(m);
  CHECK(r.errors.empty());
  CHECK(r.warnings.empty());
  CHECK(m.rooms.size() == 2);
  CHECK(m.beacons.size() == 4);
}

TEST_CASE("duplicate identifiers are reported across kinds") {
  SpaceModel m = testing::demo_space();
  m.anchors.push_back(m.anchors.front());
  CHECK(has_error(validate_space(m), "duplicate identifier a1"));

  SpaceModel cross = testing::demo_space();
  cross.walls.push_back({"b1", {0, 0}, {1, 0}});
  CHECK(has_error(validate_space(cross), "duplicate identifier b1"));
}

TEST_CASE("dangling mapping reference") {
  SpaceModel m = testing::demo_space();
  m.mappings.push_back({"a2", "b9"});
  m.mappings.erase(m.mappings.begin() + 1);  // keep a2 mapped once
  CHECK(has_error(validate_space(m), "dangling reference b9"));
}

TEST_CASE("mapping bijection and kind") {
  SpaceModel m = testing::demo_space();
  m.mappings.push_back({"a1", "b3"});
  CHECK_FALSE(validate_space(m).ok());

  SpaceModel twice = testing::demo_space();
  twice.mappings[1].beacon_id = "b1";
  CHECK_FALSE(validate_space(twice).ok());

  SpaceModel poi = testing::demo_space();
  poi.mappings.push_back({"p_info", "b3"});
  CHECK_FALSE(validate_space(poi).ok());
}

TEST_CASE("geometry and range invariants") {
  SpaceModel bowtie = testing::demo_space();
  bowtie.rooms[0].polygon = {{0, 0}, {4, 3}, {4, 0}, {0, 3}};
  CHECK_FALSE(validate_space(bowtie).ok());

  SpaceModel flat = testing::demo_space();
  flat.rooms[0].polygon = {{0, 0}, {1, 0}, {2, 0}};
  CHECK_FALSE(validate_space(flat).ok());

  SpaceModel wall = testing::demo_space();
  wall.walls[0].p2 = wall.walls[0].p1;
  CHECK_FALSE(validate_space(wall).ok());

  SpaceModel below = testing::demo_space();
  below.anchors[0].position.z() = -0.1;
  CHECK_FALSE(validate_space(below).ok());

  SpaceModel exponent = testing::demo_space();
  exponent.beacons[0].path_loss_exponent = 0.5;
  CHECK_FALSE(validate_space(exponent).ok());
  exponent.beacons[0].path_loss_exponent = 6.0;
  CHECK(validate_space(exponent).ok());

  SpaceModel power = testing::demo_space();
  power.beacons[0].tx_power_dbm_at_1m = 1.0;
  CHECK_FALSE(validate_space(power).ok());
}

TEST_CASE("anchors outside rooms: assets are errors, labels are warnings") {
  SpaceModel asset = testing::demo_space();
  asset.anchors[0].position = Vec3(50, 50, 1);
  CHECK_FALSE(validate_space(asset).ok());

  SpaceModel label = testing::demo_space();
  label.anchors[4].position = Vec3(50, 50, 1);
  label.anchors[4].room_id.reset();
  const auto r = validate_space(label);
  CHECK(r.ok());
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("unmapped asset warns") {
  SpaceModel m = testing::demo_space();
  m.mappings.pop_back();
  const auto r = validate_space(m);
  CHECK(r.ok());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].subject == "a3");
}

TEST_CASE("capture points must be contiguous from an origin") {
  SpaceModel gap = testing::demo_space();
  gap.capture_points[1].order = 2;
  CHECK_FALSE(validate_space(gap).ok());

  SpaceModel moved = testing::demo_space();
  moved.capture_points[0].position = Vec2(1, 0);
  CHECK_FALSE(validate_space(moved).ok());
}

TEST_CASE("apply_mutation bumps version and adds") {
  SpaceModel m = testing::demo_space();
  m.version = 7;
  BeaconDevice b{"b5", "uid", Vec3(0, 0, 2), -60.0, 2.2};
  const SpaceModel next = apply_mutation(m, Mutation::add(b));
  CHECK(next.version == 8);
  REQUIRE(next.find_beacon("b5"));
  CHECK(*next.find_beacon("b5") == b);
  CHECK(m.version == 7);
  CHECK_FALSE(m.find_beacon("b5"));
}

TEST_CASE("apply_mutation rejects unknown ids and leaves the model untouched") {
  const SpaceModel m = testing::demo_space();
  const SpaceModel before = m;
  CHECK(code_of([&] { (void)apply_mutation(m, Mutation::remove(EntityKind::Anchor, "nope")); }) ==
        ErrorCode::UnknownId);
  CHECK(m == before);
  CHECK(code_of([&] { (void)apply_mutation(m, Mutation::add(m.anchors[0])); }) == ErrorCode::DuplicateId);
  // ids are unique across kinds
  CHECK(code_of([&] { (void)apply_mutation(m, Mutation::add(WallSegment{"a1", {0, 0}, {1, 0}})); }) ==
        ErrorCode::DuplicateId);
}

TEST_CASE("apply_mutation updating a description changes nothing else") {
  const SpaceModel m = testing::demo_space();
  Anchor a = m.anchors[0];
  a.description = "restored in 2023";
  const SpaceModel next = apply_mutation(m, Mutation::update(a));
  SpaceModel expected = m;
  expected.anchors[0].description = "restored in 2023";
  expected.version = m.version + 1;
  CHECK(next == expected);
}

TEST_CASE("apply_mutation rejects changes that would invalidate the model") {
  const SpaceModel m = testing::demo_space();
  try {
    (void)apply_mutation(m, Mutation::remove(EntityKind::Beacon, "b1"));  // a1 -> b1 mapping dangles
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationFailed);
    CHECK_FALSE(e.details().empty());
  }
  Anchor outside = m.anchors[0];
  outside.position = Vec3(100, 0, 1);
  CHECK(code_of([&] { (void)apply_mutation(m, Mutation::update(outside)); }) == ErrorCode::ValidationFailed);
}

TEST_CASE("mapping mutations are keyed by asset id") {
  const SpaceModel m = testing::demo_space();
  const SpaceModel removed = apply_mutation(m, Mutation::remove(EntityKind::Mapping, "a3"));
  CHECK_FALSE(removed.mapping_for_asset("a3"));
  const SpaceModel remapped = apply_mutation(removed, Mutation::add(PoiDeviceMapping{"a3", "b3"}));
  REQUIRE(remapped.mapping_for_asset("a3"));
  CHECK(remapped.mapping_for_asset("a3")->beacon_id == "b3");
  CHECK(remapped.version == m.version + 2);
}

TEST_CASE("accepted random mutations keep the model valid and the input untouched") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-8.0, 18.0);
  SpaceModel m = testing::demo_space();
  int accepted = 0;
  for (int i = 0; i < 400; ++i) {
    const SpaceModel before = m;
    Mutation mu;
    switch (rng() % 4) {
      case 0: {
        Anchor a{"n" + std::to_string(i), AnchorKind::Asset, "t", "d", Vec3(coord(rng), coord(rng) / 2, 1.0), {}};
        mu = Mutation::add(a);
        break;
      }
      case 1: {
        if (m.anchors.empty()) continue;
        Anchor a = m.anchors[rng() % m.anchors.size()];
        a.position = Vec3(coord(rng), coord(rng) / 2, a.position.z());
        mu = Mutation::update(a);
        break;
      }
      case 2: {
        if (m.anchors.empty()) continue;
        mu = Mutation::remove(EntityKind::Anchor, m.anchors[rng() % m.anchors.size()].id);
        break;
      }
      default: {
        BeaconDevice b{"nb" + std::to_string(i), "", Vec3(coord(rng), coord(rng), 2.0), -59.0 - (rng() % 50),
                       0.4 + 0.1 * static_cast<double>(rng() % 60)};
        mu = Mutation::add(b);
      }
    }
    try {
      SpaceModel next = apply_mutation(m, mu);
      CHECK(validate_space(next).ok());
      CHECK(next.version == m.version + 1);
      ++accepted;
      CHECK(m == before);
      m = std::move(next);
    } catch (const Error&) {
      CHECK(m == before);
    }
  }
  CHECK(accepted > 50);
}

}

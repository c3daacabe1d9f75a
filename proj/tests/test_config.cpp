#include <doctest.h>

#include <cmath>

#include "chromacs/config.hpp"
#include "chromacs/errors.hpp"

using namespace chromacs;

TEST_CASE("INI parsing flattens sections to dotted keys") {
    const auto cfg = Config::from_string("[optics]\nf_ref_mm = 35\ndetector_offsets_mm = -0.1, 0, 0.1\n"
                                         "object_distance_mm = inf\n[mask]\nseed=9\n");
    CHECK(cfg.get_double("optics.f_ref_mm", 0.0) == 35.0);
    CHECK(cfg.get_reals("optics.detector_offsets_mm", {}) == std::vector<double>{-0.1, 0.0, 0.1});
    CHECK(std::isinf(cfg.get_double("optics.object_distance_mm", 0.0)));
    CHECK(cfg.get_u64("mask.seed", 0) == 9);
    CHECK(cfg.get_size("mask.count", 3) == 3);
    CHECK_FALSE(cfg.contains("mask.count"));
}

TEST_CASE("overrides and typed access errors") {
    auto cfg = Config::from_string("[solver]\nmax_iters = 10\n");
    cfg.apply_override("solver.max_iters=25");
    cfg.apply_override("solver.warm_start = off");
    CHECK(cfg.get_size("solver.max_iters", 0) == 25);
    CHECK_FALSE(cfg.get_bool("solver.warm_start", true));

    const auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::InvalidArgument;
    };
    CHECK(code([&] { cfg.apply_override("no-equals-sign"); }) == Errc::ConfigError);
    cfg.set("mask.seed", "-3");
    CHECK(code([&] { cfg.get_u64("mask.seed", 0); }) == Errc::ConfigError);
    cfg.set("solver.gamma", "1.5x");
    CHECK(code([&] { cfg.get_double("solver.gamma", 0.0); }) == Errc::ConfigError);
    cfg.set("solver.warm_start", "maybe");
    CHECK(code([&] { cfg.get_bool("solver.warm_start", true); }) == Errc::ConfigError);
    CHECK(code([] { Config::from_string("[broken\nx=1\n"); }) == Errc::ConfigError);
    CHECK(code([] { Config::from_file("/nonexistent/path.ini"); }) == Errc::ConfigError);
}

TEST_CASE("canonical form and digest") {
    const auto a = Config::from_string("[b]\ny=2\n[a]\nx=1\n");
    auto b = Config::from_string("[a]\nx = 1\n");
    b.apply_override("b.y=2");
    CHECK(a.canonical() == "a.x=1\nb.y=2\n");
    CHECK(a.digest() == b.digest());
    b.apply_override("b.y=3");
    CHECK(a.digest() != b.digest());
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("unknown keys are reported") {
    const auto cfg = Config::from_string("[optics]\nfocal = 3\n");
    const std::array<std::string_view, 1> known{"optics.f_ref_mm"};
    CHECK_THROWS_AS(cfg.check_known(known), Error);
}

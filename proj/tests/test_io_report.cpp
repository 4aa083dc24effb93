#include <doctest.h>

#include "qms/fixtures.hpp"
#include "qms/report.hpp"
#include "test_helpers.hpp"

using namespace qms;
using namespace qmstest;

TEST_CASE("model JSON round trip")
{
    const GkslModel& m = fixtures::get("tensor_K12").model;
    io::Json j = io::model_to_json(m);
    GkslModel back = io::model_from_json(j);
    CHECK(back.dim == m.dim);
    CHECK((back.hamiltonian - m.hamiltonian).norm() < 1e-15);
    REQUIRE(back.jumps.size() == m.jumps.size());
    for (size_t k = 0; k < m.jumps.size(); ++k)
        CHECK((back.jumps[k] - m.jumps[k]).norm() < 1e-15);
    CHECK(back.labels == m.labels);
}

TEST_CASE("schema violations carry JSON paths")
{
    io::Json j;
    j["dim"] = 2;
    j["hamiltonian"] = io::Json::array({io::Json::array({1.0, 2.0})});
    try {
        io::model_from_json(j);
        FAIL("expected a schema error");
    } catch (const io::SchemaError& e) {
        CHECK(e.path() == std::string("$.hamiltonian"));
    }

    io::Json bad_jump = io::model_to_json(fixtures::get("example_2_6").model);
    bad_jump["jumps"][0][1][2] = "oops";
    try {
        io::model_from_json(bad_jump);
        FAIL("expected a schema error");
    } catch (const io::SchemaError& e) {
        CHECK(e.path() == std::string("$.jumps[0][1][2]"));
    }
}

TEST_CASE("fixture inventory and exact content")
{
    auto names = fixtures::names();
    REQUIRE(names.size() >= 6);
    for (const char* expected : {"example_2_6", "example_4_3", "depolarizing_qubit",
                                 "amplitude_damping_qubit", "tensor_K12", "unitary_only"})
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());

    const GkslModel& e26 = fixtures::get("example_2_6").model;
    CHECK((e26.hamiltonian - unit(3, 0, 0)).norm() == 0.0);
    REQUIRE(e26.jumps.size() == 1);
    CHECK((e26.jumps[0] - unit(3, 1, 2)).norm() == 0.0);

    CHECK_THROWS_AS(fixtures::get("no_such_fixture"), ValidationError);
}

TEST_CASE("generic 3-level fixture satisfies its rate convention self-check")
{
    // Σ L†L = −(G + G†) with G = −(γ33/2) e33 + iκ3 e33, γ33 = γ31 + γ32
    const GkslModel& m = fixtures::get("example_4_3").model;
    Matrix sum = Matrix::Zero(3, 3);
    for (const Matrix& l : m.jumps) sum += l.adjoint() * l;
    const Matrix g = -0.5 * sum + Complex(0, 1) * m.hamiltonian;
    CHECK((sum + (g + g.adjoint())).norm() < 1e-12);
}

TEST_CASE("analysis reports are deterministic")
{
    AnalysisConfig cfg;
    cfg.seed = 7;
    AnalysisContext ctx1(fixtures::get("example_2_6").model, cfg);
    AnalysisContext ctx2(fixtures::get("example_2_6").model, cfg);
    const std::string a = run_analyze(ctx1, "example_2_6").dump();
    const std::string b = run_analyze(ctx2, "example_2_6").dump();
    CHECK(a == b);
}

TEST_CASE("analyze report on the cascade fixture carries the reference numbers")
{
    AnalysisConfig cfg;
    cfg.include_bases = false;
    AnalysisContext ctx(fixtures::get("example_2_6").model, cfg);
    io::Json report = run_analyze(ctx, "example_2_6");
    CHECK(report["nt"]["dim"] == 2);
    CHECK(report["spectrum"]["mr_dim"] == 4);
    CHECK(report["states"]["faithful"]["found"] == false);
    CHECK(report["states"]["invariant_kernel_dim"] == 2);
    CHECK(report["eid"]["eid_holds"] == false);
    // every hypothesis-dependent crosscheck row is labeled, none silently pass
    for (const auto& row : report["crosscheck"]) {
        if (row["verdict"] == "SKIPPED")
            CHECK(row["note"].get<std::string>().find("faithful") != std::string::npos);
        else
            CHECK(row["verdict"] == "PASS");
    }
    const std::string text = render_text(report);
    CHECK(text.find("N(T): dim 2") != std::string::npos);
}

TEST_CASE("analyze report on the depolarizing qubit")
{
    AnalysisConfig cfg;
    cfg.include_bases = false;
    AnalysisContext ctx(fixtures::get("depolarizing_qubit").model, cfg);
    io::Json report = run_analyze(ctx, "depolarizing_qubit");
    CHECK(report["eid"]["eid_holds"] == true);
    CHECK(report["ft"]["dim"] == 1);
    CHECK(report["states"]["faithful"]["found"] == true);
    Matrix state = io::matrix_from_json(report["states"]["faithful"]["candidate"], "$");
    CHECK((state - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-9);
    CHECK(report["model"]["echo"]["dim"] == 2);
}

TEST_CASE("analyze report on the generic 3-level fixture")
{
    AnalysisConfig cfg;
    cfg.include_bases = false;
    AnalysisContext ctx(fixtures::get("example_4_3").model, cfg);
    io::Json report = run_analyze(ctx, "example_4_3");
    CHECK(report["nt"]["dim"] == 1);
    CHECK(report["states"]["faithful"]["found"] == false);
    CHECK(report["states"]["reversible"]["equals_nt_predual"] == false);
    CHECK(report["states"]["reversible"]["dim"].get<int>() >= 2);
}

TEST_CASE("crosscheck on faithful fixtures passes everything applicable")
{
    for (const char* name : {"depolarizing_qubit", "tensor_K12", "unitary_only"}) {
        AnalysisConfig cfg;
        AnalysisContext ctx(fixtures::get(name).model, cfg);
        for (const auto& row : run_crosscheck(ctx)) {
            INFO(name << ": " << row.name << " residual " << row.residual);
            CHECK(row.verdict != "FAIL");
        }
    }
}

TEST_CASE("evolve distances: invariant states stay put, damped states converge")
{
    AnalysisConfig cfg;
    { // invariant input: distance ≈ 0 for all t
        AnalysisContext ctx(fixtures::get("depolarizing_qubit").model, cfg);
        auto rows = run_evolve(ctx, 0.5 * Matrix::Identity(2, 2), {0.0, 1.0, 2.0});
        for (const auto& row : rows) CHECK(row.distance < 1e-10);
    }
    { // depolarizing from a pure state: exact exponential with the gap rate
        AnalysisContext ctx(fixtures::get("depolarizing_qubit").model, cfg);
        auto rows = run_evolve(ctx, unit(2, 0, 0), {0.0, 1.0, 2.0, 4.0});
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].distance > 1e-3);
        for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].distance < rows[i - 1].distance);
        // ratio over Δt = 1 equals e^{−gap} with gap = 4
        const double ratio = rows[1].distance / rows[0].distance;
        CHECK(std::abs(ratio - std::exp(-4.0)) < 1e-6);
    }
    { // cascade from e33: decay at rate 1
        AnalysisContext ctx(fixtures::get("example_2_6").model, cfg);
        auto rows = run_evolve(ctx, unit(3, 2, 2), {0.0, 1.0, 2.0});
        const double r1 = rows[1].distance / rows[0].distance;
        const double r2 = rows[2].distance / rows[1].distance;
        CHECK(std::abs(r1 - std::exp(-1.0)) < 1e-6);
        CHECK(std::abs(r2 - std::exp(-1.0)) < 1e-6);
    }
}

TEST_CASE("evolve rejects invalid densities")
{
    AnalysisConfig cfg;
    AnalysisContext ctx(fixtures::get("depolarizing_qubit").model, cfg);
    Matrix not_normalized = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(run_evolve(ctx, not_normalized, {0.0}), ValidationError);
}

TEST_CASE("absurd rank tolerance surfaces as a degeneracy error")
{
    AnalysisConfig cfg;
    cfg.tol.rank = 0.5; // destroys every rank decision
    AnalysisContext ctx(fixtures::get("tensor_K12").model, cfg);
    CHECK_THROWS_AS(
        [&] {
            run_analyze(ctx, "tensor_K12");
        }(),
        std::runtime_error);
}

TEST_CASE("config validation")
{
    AnalysisConfig cfg;
    cfg.tol.rank = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    AnalysisConfig modes;
    modes.modes = {"bogus"};
    CHECK_THROWS_AS(modes.validate(), ValidationError);
    AnalysisConfig negative;
    negative.t_samples = {-1.0};
    CHECK_THROWS_AS(negative.validate(), ValidationError);
    negative.allow_negative_times = true;
    CHECK_NOTHROW(negative.validate());
}

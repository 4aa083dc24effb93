// report.hpp — Analysis orchestration: runs the selected modes in dependency
// order over one model and renders machine-readable (JSON) and human-readable
// reports. Backend of the command-line front end.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qms/asymptotics.hpp"
#include "qms/io.hpp"

namespace qms {

struct AnalysisConfig {
    Tolerances tol;
    std::uint64_t seed = 0;
    std::vector<double> t_samples = {0.1, 1.0, 10.0};
    std::set<std::string> modes = {"nt", "ft", "blocks", "spectrum", "states", "eid",
                                   "crosscheck"};
    bool allow_negative_times = false;
    bool include_bases = true;

    void validate() const; // positive tolerances, time-sample signs
};

// Lazily computed per-model analysis state shared by the commands.
class AnalysisContext {
public:
    AnalysisContext(GkslModel model, AnalysisConfig config);

    const GkslModel& model() const { return model_; }
    const AnalysisConfig& config() const { return config_; }

    const Superoperator& generator();
    const Superoperator& predual();
    const StarAlgebra& nt();
    const StarAlgebra& ft();
    const BlockStructure& nt_blocks();
    const BlockOperators& nt_block_ops();
    const BlockStructure& ft_blocks();
    const BlockOperators& ft_block_ops();
    const SpectralSplit& spectrum();
    const SpectralSplit& predual_spectrum();
    const InvariantStates& invariants();
    const FaithfulSearch& faithful();

private:
    GkslModel model_;
    AnalysisConfig config_;
    std::optional<Superoperator> generator_, predual_;
    std::optional<StarAlgebra> nt_, ft_;
    std::optional<BlockStructure> nt_blocks_, ft_blocks_;
    std::optional<BlockOperators> nt_block_ops_, ft_block_ops_;
    std::optional<SpectralSplit> spectrum_, predual_spectrum_;
    std::optional<InvariantStates> invariants_;
    std::optional<FaithfulSearch> faithful_;
};

struct CrosscheckRow {
    std::string name;
    std::string verdict; // PASS | FAIL | SKIPPED
    double residual = 0.0;
    double tolerance = 0.0;
    std::string note;
};

std::vector<CrosscheckRow> run_crosscheck(AnalysisContext& ctx);

// Full analysis report (JSON is the primary artifact; the text rendering is
// derived from it).
io::Json run_analyze(AnalysisContext& ctx, const std::string& model_echo_name = "");
std::string render_text(const io::Json& report);

struct EvolveRow {
    double t = 0.0;
    double distance = 0.0; // trace-norm distance to the reversible projection
};

std::vector<EvolveRow> run_evolve(AnalysisContext& ctx, const Matrix& state,
                                  const std::vector<double>& times);

} // namespace qms

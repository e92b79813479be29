#pragma once

// JSON and CSV renderings of reports, and atomic file output.

#include <filesystem>
#include <string>
#include <vector>

#include "fpk/chol.hpp"
#include "fpk/config.hpp"
#include "fpk/fpcheck.hpp"
#include "fpk/lyapunov.hpp"
#include "fpk/measure.hpp"

namespace fpk {

Json to_json(const Matrix& m);
Json to_json(const SigmaFactor& s);
Json to_json(const EllipticityEstimate& e);
Json to_json(const RegularityProbe& p);
Json to_json(const Estimate& e);
Json to_json(const MomentSummary& m);
/// Summary plus the worst 10 samples; the full sample list goes to CSV.
Json to_json(const ConditionReport& r);
Json to_json(const ResidualReport& r);
Json to_json(const MarginalComparison& c);
Json to_json(const UniquenessReport& r);
Json to_json(const ErgodicReport& r);
Json to_json(const RefinementTable& t);

/// condition,shell,direction,part,radius,x1..xd,lhs,rhs,margin[,gap_half,bound_half]
std::string margins_csv(const std::vector<ConditionReport>& reports);
/// snapshot_t,path_id,alive,x1..xd
std::string particles_csv(const SimResult& sim);
/// t,bank_k...,mass_E...
std::string ergodic_csv(const ErgodicReport& r);

/// Shortest decimal that round-trips.
std::string format_double(double v);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Two-space indented JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace fpk

#pragma once

#include <stdexcept>
#include <string>

namespace redmod {

// Base for every failure the engine reports deliberately. The CLI maps these
// to {"error": {...}} output; anything else escaping is a genuine bug.
class error : public std::runtime_error {
public:
    error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

struct syntax_error : error {
    syntax_error(const std::string& what, std::size_t at)
        : error("SyntaxError", what + " (byte " + std::to_string(at) + ")"), offset(at) {}
    std::size_t offset;
};

struct unknown_identifier : error {
    explicit unknown_identifier(const std::string& name)
        : error("UnknownIdentifier", "'" + name + "' is not declared in this context") {}
};

struct zero_denominator : error {
    explicit zero_denominator(const std::string& what) : error("ZeroDenominator", what) {}
};

struct singular_substitution : error {
    explicit singular_substitution(const std::string& what) : error("SingularSubstitution", what) {}
};

struct resource_limit : error {
    explicit resource_limit(const std::string& what) : error("ResourceLimit", what) {}
};

struct rank_deficient : error {
    explicit rank_deficient(const std::string& what) : error("RankDeficient", what) {}
};

struct not_involutive : error {
    explicit not_involutive(const std::string& what) : error("NotInvolutive", what) {}
};

struct degenerate_invariant : error {
    explicit degenerate_invariant(const std::string& what) : error("DegenerateInvariant", what) {}
};

struct missing_inverse : error {
    explicit missing_inverse(const std::string& what) : error("MissingInverse", what) {}
};

struct leading_solve_failed : error {
    explicit leading_solve_failed(const std::string& what) : error("LeadingSolveFailed", what) {}
};

struct not_reduction_module : error {
    explicit not_reduction_module(const std::string& what) : error("NotReductionModule", what) {}
};

struct change_of_jet_coordinates_failed : error {
    explicit change_of_jet_coordinates_failed(const std::string& what)
        : error("ChangeOfJetCoordinatesFailed", what) {}
};

struct singular_phi : error {
    explicit singular_phi(const std::string& what) : error("SingularPhi", what) {}
};

struct not_solvable : error {
    explicit not_solvable(const std::string& what) : error("NotSolvable", what) {}
};

struct degenerate_jacobian : error {
    explicit degenerate_jacobian(const std::string& what) : error("DegenerateJacobian", what) {}
};

struct eiconal_violated : error {
    explicit eiconal_violated(const std::string& what) : error("EiconalViolated", what) {}
};

struct positivity_certificate_missing : error {
    explicit positivity_certificate_missing(const std::string& what)
        : error("PositivityCertificateMissing", what) {}
};

// Raised when two independent computations of the same fact disagree
// (canonical form vs. sampling, or the cross-checked verdict triples).
struct internal_check_failure : error {
    explicit internal_check_failure(const std::string& what) : error("InternalCheckFailure", what) {}
};

}  // namespace redmod

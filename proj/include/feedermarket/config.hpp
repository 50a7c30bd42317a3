#pragma once

#include <stdexcept>
#include <string>

namespace fm {

enum class Step2Selection { paper_rule, all_residual };

// How step-2 best responses treat the step-1 commitment: `coupled` maximizes
// the incremental surplus given the already-committed quantity; `literal`
// applies the full utility/cost function to the increment alone.
enum class Step2Response { coupled, literal };

struct SolverConfig {
    double eta = 0.0;  // <= 0 means auto (reciprocal of the aggregate response slope)
    double epsilon = 1e-4;
    int max_iters = 10000;
    double lambda_init = 0.0;
    Step2Selection step2_selection = Step2Selection::paper_rule;
    Step2Response step2_response = Step2Response::coupled;
};

inline void validate(const SolverConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw std::domain_error("solver: epsilon must be > 0");
    if (cfg.max_iters < 1) throw std::domain_error("solver: max_iters must be >= 1");
    if (cfg.lambda_init < 0.0) throw std::domain_error("solver: lambda_init must be >= 0");
}

std::string to_string(Step2Selection s);
std::string to_string(Step2Response r);
Step2Selection step2_selection_from_string(const std::string& s);
Step2Response step2_response_from_string(const std::string& s);

}  // namespace fm

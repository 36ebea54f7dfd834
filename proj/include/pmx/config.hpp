#pragma once

#include <string>
#include <vector>

#include "pmx/errors.hpp"

namespace pmx {

/// Parameters of the coupled multi-matrix model: n x n-scale factors
/// G_l of size (n+nu_l) x (n+nu_{l-1}), l = 1..m, with nu_0 = nu_m = 0,
/// and coupling strength b between the last factor and the product of the
/// others.
struct ModelConfig {
    int n = 1;
    int m = 2;
    std::vector<int> nus; // nu_1 .. nu_{m-1}
    double b = 0.0;

    /// nu_j for j = 0..m (nu_0 = nu_m = 0).
    int nu(int j) const {
        if (j <= 0 || j >= m) return 0;
        return nus[size_t(j - 1)];
    }

    void validate() const {
        if (n < 1) throw ConfigError("ModelConfig: n must be >= 1");
        if (m < 2) throw ConfigError("ModelConfig: m must be >= 2");
        if (int(nus.size()) != m - 1)
            throw ConfigError("ModelConfig: expected " + std::to_string(m - 1) +
                              " nu values, got " + std::to_string(nus.size()));
        for (int v : nus)
            if (v < 0) throw ConfigError("ModelConfig: nu values must be >= 0");
        if (b < 0.0) throw ConfigError("ModelConfig: b must be >= 0");
    }
};

} // namespace pmx

#pragma once

// Published out-of-sample RMSE table used by the model-comparison checks:
// per variable (DGS10, UMCSENT, GEPUCURRENT, INDPRO_US, USD/EUR, APE, BRENT)
// for the copula-based econometric rows and the GPR hybrid rows.

#include <array>

namespace fixtures {

inline constexpr std::array<double, 7> kVarGarchClayton{0.0382, 0.0583, 0.1803, 0.0042,
                                                        0.0113, 0.0102, 0.0471};
inline constexpr std::array<double, 7> kTvpGarchMixCopula{0.0372, 0.0572, 0.1781, 0.0043,
                                                          0.0104, 0.0096, 0.0465};
inline constexpr std::array<double, 7> kVarGpr{0.0358, 0.0567, 0.1702, 0.0041,
                                               0.0101, 0.0095, 0.0408};
inline constexpr std::array<double, 7> kTvpGpr{0.0337, 0.0525, 0.1580, 0.0036,
                                               0.0099, 0.0089, 0.0403};

inline constexpr std::array<double, 7> kVarBaseline{0.0501, 0.0710, 0.1914, 0.0056,
                                                    0.0151, 0.0132, 0.0651};

}  // namespace fixtures

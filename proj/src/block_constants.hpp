#pragma once

// Chosen values, not published ones. Every value here was picked for the block
// fixture: one dominant input per output, commercial links cheaper per unit
// than consumer links, raw power and water dearer than locally made.

#include <array>

namespace sosim::block {

inline constexpr int kResources = 6;
using Column = std::array<double, kResources>;  // input coefficients, by resource

// Raw-material prices at the two provider agents.
inline constexpr double kPetrolPrice = 0.8;   // A0
inline constexpr double kCapitalPrice = 1.0;  // A0
inline constexpr double kPowerPrice = 6.0;    // A1
inline constexpr double kWaterPrice = 5.0;    // A1
inline constexpr double kGasPrice = 0.8;      // A1

// Per-unit transport, same for every resource on a link.
inline constexpr double kCommercialLinkCost = 0.05;
inline constexpr double kConsumerLinkCost = 0.20;

// A1 turns mostly gas into power.
inline constexpr Column kA1Power = {0.05, 0.05, 0.55, 0.05, 0.05, 0.02};

// A3 and A4 make consumer goods; capital-led and petrol-led respectively.
inline constexpr Column kA3Consumer = {0.10, 0.10, 0.10, 0.15, 0.50, 0.05};
inline constexpr Column kA4Consumer = {0.10, 0.05, 0.10, 0.50, 0.15, 0.05};

// Household production of consumer goods, costlier than buying in.
inline constexpr Column kHouseholdConsumer = {0.20, 0.20, 0.10, 0.10, 0.60, 0.0};

}  // namespace sosim::block

#pragma once

#include <ostream>
#include <string>

#include "screwdyn/sim/simulate.hpp"

namespace screwdyn::sim {

enum class OutputFormat { Csv, Jsonl };

inline constexpr const char* kCsvHeader = "t,body,qw,qx,qy,qz,dx,dy,dz,vx,vy,vz,wx,wy,wz,e_kin,e_pot";

/// Shortest %.17g rendering, with negative zero printed as 0.
std::string format_number(double v);

void write_trajectory(std::ostream& out, const SimulationResult& res, OutputFormat format);

/// key=value lines: status, steps, t_end, energies, drift, residual maxima and,
/// for failed runs, last_finite_time and message.
std::string format_summary(const SimulationResult& res);

}  // namespace screwdyn::sim

#include "bellsim/pulse.hpp"

#include <cmath>
#include <sstream>

#include "bellsim/errors.hpp"

namespace bellsim {

void PulseSpec::validate() const {
  if (!(duration > 0.0)) throw SequencingError("pulse duration must be positive");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw SequencingError("pulse area must be finite and non-negative");
  if (!(lattice_wavevector > 0.0)) throw SequencingError("pulse lattice wavevector must be positive");
  if (!(area_scale > 0.0)) throw SequencingError("pulse area scale must be positive");
}

double PulseSpec::unit_area() const {
  if (envelope == Envelope::square) return duration;
  const double sigma = duration / 6.0;
  return sigma * std::sqrt(2.0 * constants::pi) * std::erf(3.0 / std::sqrt(2.0));
}

double PulseSpec::peak_depth() const { return area_scale * constants::hbar * theta / unit_area(); }

EnvelopeFn PulseSpec::envelope_fn() const {
  const double depth = peak_depth();
  return envelope == Envelope::square ? square_envelope(depth, start_time, duration)
                                      : gaussian_envelope(depth, start_time, duration);
}

PotentialField PulseSpec::potential() const {
  validate();
  return bragg_potential(target, envelope_fn(), lattice_wavevector, detuning, phi, start_time);
}

std::string PulseSpec::describe() const {
  std::ostringstream os;
  os << "target=" << to_string(target) << " theta=" << theta << " phi=" << phi
     << " envelope=" << to_string(envelope) << " start_s=" << start_time << " duration_s=" << duration
     << " detuning_rad_per_s=" << detuning << " area_scale=" << area_scale;
  return os.str();
}

}  // namespace bellsim

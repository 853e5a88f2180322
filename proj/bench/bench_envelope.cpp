#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "omniteleop/envelope.hpp"

using namespace omniteleop;

template <typename F>
double seconds(F&& f, int repeats) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

int main(int argc, char** argv) {
  const int resolution = argc > 1 ? std::atoi(argv[1]) : 40;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
  const AllocationParams ap;

  EnvelopeResult serial, parallel;
  const double ts = seconds([&] { serial = compute_envelope_serial(ap, resolution); }, repeats);
  const double tp = seconds([&] { parallel = compute_envelope(ap, resolution); }, repeats);

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial.force.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(serial.force[i].magnitude - parallel.force[i].magnitude));
  }
  std::printf("resolution %d, %zu directions, %d threads\n", resolution, serial.force.size(),
              omp_get_max_threads());
  std::printf("serial   %.4f s\nparallel %.4f s\nspeedup  %.2fx\nmax |diff| %.3g\n", ts, tp, ts / tp, max_diff);
  return 0;
}

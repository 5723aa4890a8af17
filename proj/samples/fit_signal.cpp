// Fits the split (scaling + Gabor) model to the bumps signal twice, once with
// atoms placed on wavelet modulus maxima and once at random, and prints the
// training curves side by side.

#include <cstdio>

#include "winr/winr.hpp"

int main() {
  using namespace winr;
  const auto sig = gen_signal("bumps", 1024);
  const auto points = signal_wmm_points(sig);
  std::printf("%zu modulus-maxima points:", points.size());
  for (const auto& p : points.points) std::printf(" %.3f", p.location[0]);
  std::printf("\n");

  const SplitArch arch;
  const auto data = make_dataset(sig.grid, sig.values, arch.coord_scale);
  TrainConfig cfg;
  cfg.steps = 600;
  for (auto scheme : {InitScheme::Random, InitScheme::Wmm}) {
    auto split = make_split_model(1, arch, scheme, points, 3, 0);
    const auto h = train(split, data, cfg, [&](std::size_t step, double loss) {
      if (step % 100 == 0) std::printf("  %-6s step %4zu  mse %.3e\n", to_string(scheme).c_str(), step, loss);
    });
    std::printf("%-6s final mse %.3e (%.1f dB)\n", to_string(scheme).c_str(), h.final_mse, h.final_psnr);
  }
}

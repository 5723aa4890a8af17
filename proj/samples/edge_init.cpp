// Canny edges of a disk image and the Gabor atoms placed on them.

#include <cstdio>

#include "winr/winr.hpp"

int main() {
  using namespace winr;
  ImageSpec spec;
  spec.size = 64;
  spec.radius = 16.0;
  const Image img = gen_image(spec);
  const auto edges = canny_edges(img);
  const auto points = edge_points(edges, image_grid(img), 12);
  std::printf("%zu edge pixels, %zu atoms\n", edges.count(), points.size());
  for (const auto& p : points.points)
    std::printf("  (%.3f, %.3f)  scale %.4f  normal %+.2f rad\n", p.location[0], p.location[1], p.scale, p.theta);

  const auto arch = gabor_arch(2, points.size(), SplitArch{});
  const auto first = wmm_initialize(arch, points, 1, 0);
  for (std::size_t t = 0; t < first.atoms(); t += 4)
    std::printf("atom %zu: W = [%.2f %.2f; %.2f %.2f], b = (%.2f, %.2f)\n", t, first.weight(t, 0, 0),
                first.weight(t, 0, 1), first.weight(t, 1, 0), first.weight(t, 1, 1), first.bias(t, 0), first.bias(t, 1));
}

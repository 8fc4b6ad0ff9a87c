#pragma once

#include <algorithm>
#include <cstddef>

// Batched dense and 3x3 convolution kernels on 8x8 boards.
//
// Layouts: conv activations are [batch][channel][64] (square = rank*8+file),
// conv weights [cout][cin][3][3], dense activations [batch][features], dense
// weights [out][in]. Backward kernels overwrite dw/db/din (no accumulation);
// din may be null.
//
// Two implementations share these signatures. `serial` is the direct
// transcription of the sums and serves as the reference. `omp` reorders loops
// for vectorization and parallelizes over independent outputs; every output
// element is reduced by one thread in a fixed order, so results do not depend
// on the thread count.

namespace ogss::models {

enum class Backend { Serial, OpenMP };

// Process-wide backend used by the layers. Defaults to OpenMP.
void set_backend(Backend backend);
Backend backend();

namespace kernels {

inline constexpr int kBoard = 8;
inline constexpr int kCells = 64;

namespace serial {

template <typename T>
void conv3x3_forward(const T* in, int batch, int cin, const T* w, const T* bias, int cout, T* out) {
  for (int b = 0; b < batch; ++b)
    for (int co = 0; co < cout; ++co)
      for (int y = 0; y < kBoard; ++y)
        for (int x = 0; x < kBoard; ++x) {
          T acc = bias[co];
          for (int ci = 0; ci < cin; ++ci)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int yy = y + ky - 1;
                const int xx = x + kx - 1;
                if (yy < 0 || yy >= kBoard || xx < 0 || xx >= kBoard) continue;
                acc += w[((co * cin + ci) * 3 + ky) * 3 + kx] * in[(b * cin + ci) * kCells + yy * kBoard + xx];
              }
          out[(b * cout + co) * kCells + y * kBoard + x] = acc;
        }
}

template <typename T>
void conv3x3_backward(const T* in, int batch, int cin, const T* w, int cout, const T* dout, T* dw, T* db,
                      T* din) {
  for (int co = 0; co < cout; ++co) {
    T acc = 0;
    for (int b = 0; b < batch; ++b)
      for (int p = 0; p < kCells; ++p) acc += dout[(b * cout + co) * kCells + p];
    db[co] = acc;
  }
  for (int co = 0; co < cout; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          T acc = 0;
          for (int b = 0; b < batch; ++b)
            for (int y = 0; y < kBoard; ++y)
              for (int x = 0; x < kBoard; ++x) {
                const int yy = y + ky - 1;
                const int xx = x + kx - 1;
                if (yy < 0 || yy >= kBoard || xx < 0 || xx >= kBoard) continue;
                acc += dout[(b * cout + co) * kCells + y * kBoard + x] *
                       in[(b * cin + ci) * kCells + yy * kBoard + xx];
              }
          dw[((co * cin + ci) * 3 + ky) * 3 + kx] = acc;
        }
  if (!din) return;
  for (int b = 0; b < batch; ++b)
    for (int ci = 0; ci < cin; ++ci)
      for (int yy = 0; yy < kBoard; ++yy)
        for (int xx = 0; xx < kBoard; ++xx) {
          T acc = 0;
          for (int co = 0; co < cout; ++co)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int y = yy - ky + 1;
                const int x = xx - kx + 1;
                if (y < 0 || y >= kBoard || x < 0 || x >= kBoard) continue;
                acc += dout[(b * cout + co) * kCells + y * kBoard + x] * w[((co * cin + ci) * 3 + ky) * 3 + kx];
              }
          din[(b * cin + ci) * kCells + yy * kBoard + xx] = acc;
        }
}

template <typename T>
void dense_forward(const T* in, int batch, int nin, const T* w, const T* bias, int nout, T* out) {
  for (int b = 0; b < batch; ++b)
    for (int o = 0; o < nout; ++o) {
      T acc = bias[o];
      for (int i = 0; i < nin; ++i) acc += w[o * nin + i] * in[b * nin + i];
      out[b * nout + o] = acc;
    }
}

template <typename T>
void dense_backward(const T* in, int batch, int nin, const T* w, int nout, const T* dout, T* dw, T* db,
                    T* din) {
  for (int o = 0; o < nout; ++o) {
    T acc = 0;
    for (int b = 0; b < batch; ++b) acc += dout[b * nout + o];
    db[o] = acc;
    for (int i = 0; i < nin; ++i) {
      T g = 0;
      for (int b = 0; b < batch; ++b) g += dout[b * nout + o] * in[b * nin + i];
      dw[o * nin + i] = g;
    }
  }
  if (!din) return;
  for (int b = 0; b < batch; ++b)
    for (int i = 0; i < nin; ++i) {
      T acc = 0;
      for (int o = 0; o < nout; ++o) acc += dout[b * nout + o] * w[o * nin + i];
      din[b * nin + i] = acc;
    }
}

}  // namespace serial

namespace omp {

template <typename T>
void conv3x3_forward(const T* in, int batch, int cin, const T* w, const T* bias, int cout, T* out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b)
    for (int co = 0; co < cout; ++co) {
      T* o = out + (static_cast<std::ptrdiff_t>(b) * cout + co) * kCells;
      std::fill(o, o + kCells, bias[co]);
      for (int ci = 0; ci < cin; ++ci) {
        const T* src = in + (static_cast<std::ptrdiff_t>(b) * cin + ci) * kCells;
        const T* k = w + (static_cast<std::ptrdiff_t>(co) * cin + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(kBoard, kBoard - dy);
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(kBoard, kBoard - dx);
            const T wv = k[ky * 3 + kx];
            for (int y = y0; y < y1; ++y) {
              T* orow = o + y * kBoard;
              const T* irow = src + (y + dy) * kBoard + dx;
              for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
            }
          }
        }
      }
    }
}

template <typename T>
void conv3x3_backward(const T* in, int batch, int cin, const T* w, int cout, const T* dout, T* dw, T* db,
                      T* din) {
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    T bacc = 0;
    T* dk_all = dw + static_cast<std::ptrdiff_t>(co) * cin * 9;
    std::fill(dk_all, dk_all + cin * 9, T(0));
    for (int b = 0; b < batch; ++b) {
      const T* g = dout + (static_cast<std::ptrdiff_t>(b) * cout + co) * kCells;
      for (int p = 0; p < kCells; ++p) bacc += g[p];
      for (int ci = 0; ci < cin; ++ci) {
        const T* src = in + (static_cast<std::ptrdiff_t>(b) * cin + ci) * kCells;
        T* dk = dk_all + ci * 9;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(kBoard, kBoard - dy);
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(kBoard, kBoard - dx);
            T acc = 0;
            for (int y = y0; y < y1; ++y) {
              const T* grow = g + y * kBoard;
              const T* irow = src + (y + dy) * kBoard + dx;
              for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x];
            }
            dk[ky * 3 + kx] += acc;
          }
        }
      }
    }
    db[co] = bacc;
  }
  if (!din) return;
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b)
    for (int ci = 0; ci < cin; ++ci) {
      T* d = din + (static_cast<std::ptrdiff_t>(b) * cin + ci) * kCells;
      std::fill(d, d + kCells, T(0));
      for (int co = 0; co < cout; ++co) {
        const T* g = dout + (static_cast<std::ptrdiff_t>(b) * cout + co) * kCells;
        const T* k = w + (static_cast<std::ptrdiff_t>(co) * cin + ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          const int dy = ky - 1;
          const int y0 = std::max(0, -dy);
          const int y1 = std::min(kBoard, kBoard - dy);
          for (int kx = 0; kx < 3; ++kx) {
            const int dx = kx - 1;
            const int x0 = std::max(0, -dx);
            const int x1 = std::min(kBoard, kBoard - dx);
            const T wv = k[ky * 3 + kx];
            for (int y = y0; y < y1; ++y) {
              T* drow = d + (y + dy) * kBoard + dx;
              const T* grow = g + y * kBoard;
              for (int x = x0; x < x1; ++x) drow[x] += wv * grow[x];
            }
          }
        }
      }
    }
}

template <typename T>
void dense_forward(const T* in, int batch, int nin, const T* w, const T* bias, int nout, T* out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int b = 0; b < batch; ++b)
    for (int o = 0; o < nout; ++o) {
      const T* x = in + static_cast<std::ptrdiff_t>(b) * nin;
      const T* row = w + static_cast<std::ptrdiff_t>(o) * nin;
      T acc = 0;
      for (int i = 0; i < nin; ++i) acc += row[i] * x[i];
      out[static_cast<std::ptrdiff_t>(b) * nout + o] = bias[o] + acc;
    }
}

template <typename T>
void dense_backward(const T* in, int batch, int nin, const T* w, int nout, const T* dout, T* dw, T* db,
                    T* din) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < nout; ++o) {
    T* row = dw + static_cast<std::ptrdiff_t>(o) * nin;
    std::fill(row, row + nin, T(0));
    T bacc = 0;
    for (int b = 0; b < batch; ++b) {
      const T g = dout[static_cast<std::ptrdiff_t>(b) * nout + o];
      bacc += g;
      if (g == T(0)) continue;
      const T* x = in + static_cast<std::ptrdiff_t>(b) * nin;
      for (int i = 0; i < nin; ++i) row[i] += g * x[i];
    }
    db[o] = bacc;
  }
  if (!din) return;
#pragma omp parallel for schedule(static)
  for (int b = 0; b < batch; ++b) {
    T* d = din + static_cast<std::ptrdiff_t>(b) * nin;
    std::fill(d, d + nin, T(0));
    for (int o = 0; o < nout; ++o) {
      const T g = dout[static_cast<std::ptrdiff_t>(b) * nout + o];
      if (g == T(0)) continue;
      const T* row = w + static_cast<std::ptrdiff_t>(o) * nin;
      for (int i = 0; i < nin; ++i) d[i] += g * row[i];
    }
  }
}

}  // namespace omp

template <typename T>
void conv3x3_forward(Backend be, const T* in, int batch, int cin, const T* w, const T* bias, int cout, T* out) {
  if (be == Backend::Serial) serial::conv3x3_forward(in, batch, cin, w, bias, cout, out);
  else omp::conv3x3_forward(in, batch, cin, w, bias, cout, out);
}

template <typename T>
void conv3x3_backward(Backend be, const T* in, int batch, int cin, const T* w, int cout, const T* dout, T* dw,
                      T* db, T* din) {
  if (be == Backend::Serial) serial::conv3x3_backward(in, batch, cin, w, cout, dout, dw, db, din);
  else omp::conv3x3_backward(in, batch, cin, w, cout, dout, dw, db, din);
}

template <typename T>
void dense_forward(Backend be, const T* in, int batch, int nin, const T* w, const T* bias, int nout, T* out) {
  if (be == Backend::Serial) serial::dense_forward(in, batch, nin, w, bias, nout, out);
  else omp::dense_forward(in, batch, nin, w, bias, nout, out);
}

template <typename T>
void dense_backward(Backend be, const T* in, int batch, int nin, const T* w, int nout, const T* dout, T* dw,
                    T* db, T* din) {
  if (be == Backend::Serial) serial::dense_backward(in, batch, nin, w, nout, dout, dw, db, din);
  else omp::dense_backward(in, batch, nin, w, nout, dout, dw, db, din);
}

}  // namespace kernels
}  // namespace ogss::models

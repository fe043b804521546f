#include <stdio.h>

int main(void) {
  unsigned char b[5] = {0};
  fread(b, 1, 5, stdin);
  int r = 0;
  if (b[0] == 0x11)
    r |= 1;
  if (b[1] == 0x22)
    r |= 2;
  if (b[2] == 0x33)
    r |= 4;
  if (b[3] == 0x44)
    r |= 8;
  if (b[4] == 0x55)
    r |= 16;
  return r;
}

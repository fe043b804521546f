#include <stdio.h>

int main(void) {
  int x = getchar();
  int y = x * 3;
  if (y == 300)
    return 1;
  return 0;
}

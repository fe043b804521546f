#include <stdio.h>

extern int g;

int main(void) {
  int v = g + getchar();
  if (v == 'z')
    return 1;
  return 0;
}

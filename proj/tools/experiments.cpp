namespace mpradon {}
